#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "encyclink/hash.hpp"
#include "encyclink/jsonl.hpp"

namespace encyclink {

// A document embedding. Vectors handed out by an Embedder are L2-normalized
// (or all zero), so cosine similarity reduces to a dot product.
struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;
  bool operator==(const EmbeddingVector&) const = default;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

// Throws DimMismatch for different lengths and ZeroVector for a zero input.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

EmbeddingVector normalized(std::span<const double> values);

enum class ProviderKind { Mock, File, External };

struct EmbeddingProviderSpec {
  ProviderKind kind = ProviderKind::Mock;
  std::size_t dim = 256;
  std::string endpoint_or_path;  // file store path, or "http://..." / "stdio:<command>"
  std::uint64_t seed = 0x5eed;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 2;

  static EmbeddingProviderSpec from_json(const Json& j);
  OrderedJson to_json() const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string provider_tag() const = 0;

  // One normalized vector per text, in input order. Safe to call concurrently.
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const = 0;

  EmbeddingVector embed_one(const std::string& text) const { return embed({text}).front(); }
};

// Signed feature hashing of character trigrams and words into `dim`
// buckets; digit runs are folded to "0" first. A pure function of
// (text, dim, seed).
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(std::size_t dim = 256, std::uint64_t seed = 0x5eed);

  std::size_t dim() const override { return dim_; }
  std::string provider_tag() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

  EmbeddingVector embed_text(std::string_view text) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Content-addressed vector store: sha256(text) -> float32 vector.
//
// Binary layout (little-endian):
//   char[8]  magic "ENCEMB01"
//   u32      format version (1)
//   u32      dim
//   u32      provider tag length, then the tag bytes (UTF-8)
//   u64      record count
//   records  32-byte sha256 digest, then dim float32 values; sorted by digest
//
// The JSONL debug form has a header line {"dim", "provider_tag"} followed
// by {"key": <hex digest>, "vector": [...]} lines.
class EmbeddingStore {
 public:
  EmbeddingStore(std::size_t dim, std::string provider_tag);

  std::size_t dim() const { return dim_; }
  const std::string& provider_tag() const { return provider_tag_; }
  std::size_t size() const { return records_.size(); }

  void put(std::string_view text, const EmbeddingVector& v);
  void put_key(const Sha256Digest& key, const EmbeddingVector& v);
  const EmbeddingVector* find(std::string_view text) const;
  const std::map<Sha256Digest, EmbeddingVector>& records() const { return records_; }

  std::string to_binary() const;
  std::string to_jsonl() const;
  static EmbeddingStore from_binary(std::string_view bytes);
  static EmbeddingStore from_jsonl(std::string_view text);

  // Chooses the form from the extension: ".jsonl" is the debug form.
  void save(const std::filesystem::path& path) const;
  static EmbeddingStore load(const std::filesystem::path& path);

 private:
  std::size_t dim_;
  std::string provider_tag_;
  std::map<Sha256Digest, EmbeddingVector> records_;
};

class FileEmbedder final : public Embedder {
 public:
  explicit FileEmbedder(EmbeddingStore store) : store_(std::move(store)) {}
  static FileEmbedder open(const std::filesystem::path& path);

  std::size_t dim() const override { return store_.dim(); }
  std::string provider_tag() const override { return store_.provider_tag(); }
  // Throws MissingEmbedding for texts that are not in the store.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

 private:
  EmbeddingStore store_;
};

// Client for an external embedding service speaking newline-delimited JSON:
// requests {"id", "text"}, responses {"id", "vector"} with ids echoed.
// Transport is HTTP POST (endpoint "http://host:port/path", one batch per
// request body) or a child process ("stdio:<shell command>").
class ExternalEmbedder final : public Embedder {
 public:
  explicit ExternalEmbedder(EmbeddingProviderSpec spec);
  ~ExternalEmbedder() override;

  std::size_t dim() const override { return spec_.dim; }
  std::string provider_tag() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

 private:
  struct Process;
  std::vector<EmbeddingVector> embed_batch_http(const std::vector<std::string>& texts,
                                                std::size_t first) const;
  std::vector<EmbeddingVector> embed_batch_stdio(const std::vector<std::string>& texts,
                                                 std::size_t first) const;
  std::vector<EmbeddingVector> parse_responses(const std::vector<std::string>& lines,
                                               std::size_t first, std::size_t count) const;

  EmbeddingProviderSpec spec_;
  mutable std::mutex process_mutex_;
  mutable std::unique_ptr<Process> process_;
};

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderSpec& spec);

}  // namespace encyclink
