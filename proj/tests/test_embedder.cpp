#include <cmath>
#include <filesystem>
#include <random>
#include <thread>

#include <httplib.h>

#include "doctest.h"
#include "encyclink/embedder.hpp"
#include "support.hpp"

using namespace encyclink;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "encyclink_test_embedder";
  std::filesystem::create_directories(dir);
  return dir / name;
}

EmbeddingVector vec(std::vector<float> v) { return EmbeddingVector{std::move(v)}; }

}  // namespace

TEST_CASE("cosine_similarity") {
  const auto v = vec({0.6f, 0.8f});
  CHECK(cosine_similarity(v, v) == doctest::Approx(1.0));
  CHECK(cosine_similarity(vec({1, 0, 0}), vec({0, 1, 0})) == 0.0);
  const float r = static_cast<float>(1.0 / std::sqrt(2.0));
  CHECK(cosine_similarity(vec({r, r}), vec({1, 0})) == doctest::Approx(0.70710678).epsilon(1e-6));
  CHECK_ERRC(cosine_similarity(vec({0, 0}), vec({1, 0})), Errc::ZeroVector);
  CHECK_ERRC(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), Errc::DimMismatch);
}

TEST_CASE("cosine is symmetric and bounded on random vectors") {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g;
  for (int i = 0; i < 500; ++i) {
    EmbeddingVector a, b;
    for (int k = 0; k < 16; ++k) {
      a.values.push_back(g(rng));
      b.values.push_back(g(rng));
    }
    const double ab = cosine_similarity(a, b);
    CHECK(ab == cosine_similarity(b, a));
    CHECK(std::abs(ab) <= 1.0 + 1e-12);
  }
}

TEST_CASE("mock embedder") {
  const MockEmbedder mock;
  const auto xs = mock.embed({"x", "x"});
  CHECK(xs[0] == xs[1]);
  const auto abc = mock.embed_one("abc");
  CHECK(cosine_similarity(abc, abc) == doctest::Approx(1.0));
  CHECK(std::abs(abc.norm() - 1.0) <= 1e-6);

  const auto aker = mock.embed_one("Åker socken Jönköping");
  const auto asen = mock.embed_one("Åsenhöga socken Jönköping");
  const auto noise = mock.embed_one("zzzz qqqq");
  CHECK(cosine_similarity(aker, asen) > cosine_similarity(aker, noise));

  CHECK(MockEmbedder(256, 1).embed_one("abc") == MockEmbedder(256, 1).embed_one("abc"));
  CHECK_FALSE(MockEmbedder(256, 1).embed_one("abc") == MockEmbedder(256, 2).embed_one("abc"));
  CHECK(MockEmbedder(64).embed_one("abc").dim() == 64);
  CHECK_ERRC(mock.embed_one(""), Errc::EmptyText);
  // punctuation only: no features, zero vector
  CHECK(mock.embed_one("...").norm() == 0.0);
}

TEST_CASE("embedding store round trip is bitwise exact in both forms") {
  const MockEmbedder mock(32);
  EmbeddingStore store(32, mock.provider_tag());
  const std::vector<std::string> texts = {"Kalmar, stad.", "Öved, socken.", "Bajasid, stad."};
  for (const auto& t : texts) store.put(t, mock.embed_one(t));
  store.put(texts[0], mock.embed_one(texts[0]));  // duplicate text, one record
  CHECK(store.size() == 3);

  for (const auto* name : {"store.bin", "store.jsonl"}) {
    const auto path = temp_path(name);
    store.save(path);
    const auto back = EmbeddingStore::load(path);
    CHECK(back.provider_tag() == store.provider_tag());
    CHECK(back.dim() == 32);
    CHECK(back.records() == store.records());
    const auto file = FileEmbedder::open(path);
    CHECK(file.embed(texts) == mock.embed(texts));
    CHECK_ERRC(file.embed({"not stored"}), Errc::MissingEmbedding);
  }
  CHECK(EmbeddingStore::from_binary(store.to_binary()).to_binary() == store.to_binary());
  CHECK_ERRC(EmbeddingStore::from_binary("garbage"), Errc::FormatError);
  auto bin = store.to_binary();
  bin.pop_back();
  CHECK_ERRC(EmbeddingStore::from_binary(bin), Errc::FormatError);
  CHECK_ERRC(store.put("x", vec({1.0f})), Errc::DimMismatch);
}

TEST_CASE("embedding store binary header layout") {
  EmbeddingStore store(2, "t");
  store.put("a", vec({1.0f, 0.0f}));
  const auto bin = store.to_binary();
  CHECK(bin.substr(0, 8) == "ENCEMB01");
  CHECK(bin.size() == 8 + 4 + 4 + 4 + 1 + 8 + 32 + 2 * 4);
  CHECK(static_cast<unsigned char>(bin[12]) == 2);  // dim, little-endian
}

TEST_CASE("external embedder over stdio") {
  EmbeddingProviderSpec spec;
  spec.kind = ProviderKind::External;
  spec.dim = 48;
  spec.batch_size = 4;
  spec.endpoint_or_path = std::string("stdio:") + FAKE_EMBED_SERVICE + " 48";
  const auto ext = make_embedder(spec);
  std::vector<std::string> texts;
  for (int i = 0; i < 11; ++i) texts.push_back("text number " + std::to_string(i));
  const auto got = ext->embed(texts);
  const MockEmbedder mock(48);
  REQUIRE(got.size() == texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto want = mock.embed_one(texts[i]);
    for (std::size_t k = 0; k < 48; ++k) CHECK(got[i].values[k] == doctest::Approx(want.values[k]).epsilon(1e-6));
  }
  // second call reuses the child process
  CHECK(ext->embed({"x"}).size() == 1);

  spec.dim = 16;
  const auto wrong_dim = make_embedder(spec);
  CHECK_ERRC(wrong_dim->embed({"x"}), Errc::DimMismatch);

  spec.endpoint_or_path = "stdio:exit 0";
  const auto dead = make_embedder(spec);
  CHECK_ERRC(dead->embed({"x"}), Errc::ProviderUnavailable);
}

TEST_CASE("external embedder over HTTP") {
  const MockEmbedder mock(24);
  httplib::Server server;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    std::string out;
    std::size_t pos = 0;
    while (pos < req.body.size()) {
      auto nl = req.body.find('\n', pos);
      if (nl == std::string::npos) nl = req.body.size();
      const auto line = req.body.substr(pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      nlohmann::ordered_json r;
      r["id"] = j.at("id");
      r["vector"] = mock.embed_text(j.at("text").get<std::string>()).values;
      out += r.dump() + "\n";
    }
    res.set_content(out, "application/x-ndjson");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  EmbeddingProviderSpec spec;
  spec.kind = ProviderKind::External;
  spec.dim = 24;
  spec.batch_size = 3;
  spec.max_in_flight = 2;
  spec.endpoint_or_path = "http://127.0.0.1:" + std::to_string(port) + "/embed";
  const auto ext = make_embedder(spec);
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("ord " + std::to_string(i * 7));
  const auto got = ext->embed(texts);
  REQUIRE(got.size() == 10);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CHECK(cosine_similarity(got[i], mock.embed_one(texts[i])) == doctest::Approx(1.0));
  }
  server.stop();
  t.join();

  CHECK_ERRC(ext->embed({"x"}), Errc::ProviderUnavailable);
  spec.endpoint_or_path = "ftp://nowhere";
  CHECK_ERRC(make_embedder(spec), Errc::ConfigError);
}
