#include "encyclink/embedder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "encyclink/error.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (float v : values) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(Errc::DimMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + " dimensions");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    s += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
  }
  return s;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double d = dot(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine of a zero vector");
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

EmbeddingVector normalized(std::span<const double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  EmbeddingVector out;
  out.values.resize(values.size(), 0.0f);
  if (sq == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.values[i] = static_cast<float>(values[i] * inv);
  }
  return out;
}

// ---------------------------------------------------------------------------

EmbeddingProviderSpec EmbeddingProviderSpec::from_json(const Json& j) {
  EmbeddingProviderSpec s;
  try {
    const auto kind = j.value("kind", std::string("mock"));
    if (kind == "mock") s.kind = ProviderKind::Mock;
    else if (kind == "file") s.kind = ProviderKind::File;
    else if (kind == "external") s.kind = ProviderKind::External;
    else throw Error(Errc::ConfigError, "unknown embedder kind '" + kind + "'");
    s.dim = j.value("dim", s.dim);
    s.endpoint_or_path = j.value("endpoint", j.value("path", std::string()));
    s.seed = j.value("seed", s.seed);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.max_in_flight = j.value("max_in_flight", s.max_in_flight);
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigError, std::string("embedder: ") + e.what());
  }
  if (s.dim == 0) throw Error(Errc::ConfigError, "embedder dim must be positive");
  if (s.batch_size == 0) s.batch_size = 1;
  if (s.max_in_flight == 0) s.max_in_flight = 1;
  return s;
}

OrderedJson EmbeddingProviderSpec::to_json() const {
  OrderedJson j;
  switch (kind) {
    case ProviderKind::Mock: j["kind"] = "mock"; break;
    case ProviderKind::File: j["kind"] = "file"; break;
    case ProviderKind::External: j["kind"] = "external"; break;
  }
  j["dim"] = dim;
  if (kind == ProviderKind::File) j["path"] = endpoint_or_path;
  if (kind == ProviderKind::External) {
    j["endpoint"] = endpoint_or_path;
    j["batch_size"] = batch_size;
    j["max_in_flight"] = max_in_flight;
  }
  if (kind == ProviderKind::Mock) j["seed"] = seed;
  return j;
}

// ---------------------------------------------------------------------------
// Mock

MockEmbedder::MockEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw Error(Errc::ConfigError, "mock embedder dim must be positive");
}

std::string MockEmbedder::provider_tag() const {
  return "mock-v1:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

EmbeddingVector MockEmbedder::embed_text(std::string_view text) const {
  const auto raw = utf8::decode(text);
  if (raw.empty()) throw Error(Errc::EmptyText, "cannot embed empty text");
  // every run of digits becomes a single '0', so updated figures and years
  // do not move the vector
  std::u32string cps;
  cps.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!utf8::is_digit(raw[k])) {
      cps.push_back(raw[k]);
    } else if (k == 0 || !utf8::is_digit(raw[k - 1])) {
      cps.push_back(U'0');
    }
  }
  std::vector<double> acc(dim_, 0.0);
  auto add = [&](std::string_view feature) {
    const auto h = stable_hash(feature, seed_);
    acc[h % dim_] += (h >> 63) != 0 ? -1.0 : 1.0;
  };
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!(utf8::is_letter(cps[i]) || utf8::is_digit(cps[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && (utf8::is_letter(cps[j]) || utf8::is_digit(cps[j]))) ++j;
    std::u32string padded = U" ";
    padded.append(cps, i, j - i);
    padded.push_back(U' ');
    add("w:" + utf8::encode(std::u32string_view(cps).substr(i, j - i)));
    for (std::size_t k = 0; k + 3 <= padded.size(); ++k) {
      add("t:" + utf8::encode(std::u32string_view(padded).substr(k, 3)));
    }
    i = j;
  }
  return normalized(acc);
}

std::vector<EmbeddingVector> MockEmbedder::embed(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

// ---------------------------------------------------------------------------
// File store

namespace {

constexpr char kStoreMagic[8] = {'E', 'N', 'C', 'E', 'M', 'B', '0', '1'};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error(Errc::FormatError, "embedding store truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T le() {
    const auto s = take(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    }
    return static_cast<T>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim, std::string provider_tag)
    : dim_(dim), provider_tag_(std::move(provider_tag)) {
  if (dim_ == 0) throw Error(Errc::FormatError, "embedding store dim must be positive");
}

void EmbeddingStore::put(std::string_view text, const EmbeddingVector& v) {
  put_key(sha256(text), v);
}

void EmbeddingStore::put_key(const Sha256Digest& key, const EmbeddingVector& v) {
  if (v.dim() != dim_) throw Error(Errc::DimMismatch, "vector does not match store dim");
  records_[key] = v;
}

const EmbeddingVector* EmbeddingStore::find(std::string_view text) const {
  auto it = records_.find(sha256(text));
  return it == records_.end() ? nullptr : &it->second;
}

std::string EmbeddingStore::to_binary() const {
  std::string out(kStoreMagic, sizeof kStoreMagic);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(provider_tag_.size()));
  out += provider_tag_;
  put_le<std::uint64_t>(out, records_.size());
  for (const auto& [key, vec] : records_) {
    out.append(reinterpret_cast<const char*>(key.data()), key.size());
    for (float f : vec.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

EmbeddingStore EmbeddingStore::from_binary(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof kStoreMagic) != std::string_view(kStoreMagic, sizeof kStoreMagic)) {
    throw Error(Errc::FormatError, "not an embedding store");
  }
  if (const auto version = r.le<std::uint32_t>(); version != 1) {
    throw Error(Errc::FormatError, "unsupported embedding store version " + std::to_string(version));
  }
  const auto dim = r.le<std::uint32_t>();
  const auto tag_len = r.le<std::uint32_t>();
  EmbeddingStore store(dim, std::string(r.take(tag_len)));
  const auto count = r.le<std::uint64_t>();
  for (std::uint64_t k = 0; k < count; ++k) {
    Sha256Digest key{};
    const auto kb = r.take(key.size());
    std::memcpy(key.data(), kb.data(), key.size());
    EmbeddingVector v;
    v.values.resize(dim);
    for (auto& f : v.values) f = std::bit_cast<float>(r.le<std::uint32_t>());
    if (!store.records_.emplace(key, std::move(v)).second) {
      throw Error(Errc::FormatError, "duplicate key in embedding store");
    }
  }
  if (!r.done()) throw Error(Errc::FormatError, "trailing bytes in embedding store");
  return store;
}

std::string EmbeddingStore::to_jsonl() const {
  std::string out = OrderedJson{{"dim", dim_}, {"provider_tag", provider_tag_}}.dump() + "\n";
  for (const auto& [key, vec] : records_) {
    OrderedJson j;
    j["key"] = to_hex(key);
    j["vector"] = vec.values;
    out += j.dump() + "\n";
  }
  return out;
}

EmbeddingStore EmbeddingStore::from_jsonl(std::string_view text) {
  std::optional<EmbeddingStore> store;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = Json::parse(line);
      if (!store) {
        store.emplace(j.at("dim").get<std::size_t>(), j.at("provider_tag").get<std::string>());
        continue;
      }
      EmbeddingVector v;
      v.values = j.at("vector").get<std::vector<float>>();
      const auto key = digest_from_hex(j.at("key").get<std::string>());
      if (store->records_.count(key) != 0) {
        throw Error(Errc::FormatError, "duplicate key in embedding store");
      }
      store->put_key(key, v);
    } catch (const Json::exception& e) {
      throw Error(Errc::FormatError, std::string("embedding store line: ") + e.what());
    }
  }
  if (!store) throw Error(Errc::FormatError, "embedding store has no header line");
  return std::move(*store);
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  write_file_atomic(path, path.extension() == ".jsonl" ? to_jsonl() : to_binary());
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return path.extension() == ".jsonl" ? from_jsonl(bytes) : from_binary(bytes);
}

FileEmbedder FileEmbedder::open(const std::filesystem::path& path) {
  return FileEmbedder(EmbeddingStore::load(path));
}

std::vector<EmbeddingVector> FileEmbedder::embed(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto* v = store_.find(t);
    if (v == nullptr) {
      throw Error(Errc::MissingEmbedding,
                  "no stored vector for text with sha256 " + sha256_hex(t));
    }
    out.push_back(*v);
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderSpec& spec) {
  switch (spec.kind) {
    case ProviderKind::Mock: return std::make_unique<MockEmbedder>(spec.dim, spec.seed);
    case ProviderKind::File: {
      auto e = std::make_unique<FileEmbedder>(FileEmbedder::open(spec.endpoint_or_path));
      if (e->dim() != spec.dim) {
        throw Error(Errc::DimMismatch, "embedding store has dim " + std::to_string(e->dim()) +
                                           ", config says " + std::to_string(spec.dim));
      }
      return e;
    }
    case ProviderKind::External: return std::make_unique<ExternalEmbedder>(spec);
  }
  throw Error(Errc::ConfigError, "unknown embedder kind");
}

}  // namespace encyclink
