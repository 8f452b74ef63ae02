#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "encyclink/embedder.hpp"
#include "encyclink/metrics.hpp"
#include "encyclink/segmenter.hpp"

namespace encyclink {

inline constexpr double kLinkThreshold = 0.6;
inline constexpr std::size_t kSearchResults = 5;
inline constexpr double kRadiusKm = 25.0;
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr std::size_t kDescriptionChars = 200;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const LatLon&) const = default;
};

// Throws RangeError outside [-90, 90] x [-180, 180].
void check_range(const LatLon& p);

// Great-circle distance on a sphere of radius 6371.0 km.
double haversine_km(const LatLon& a, const LatLon& b);

bool is_qid(std::string_view s);

// ---------------------------------------------------------------------------
// API access

struct ApiRequest {
  std::string url;                                 // endpoint, e.g. https://www.wikidata.org/w/api.php
  std::map<std::string, std::string> params;       // query parameters

  // "GET <url>\n" followed by one "<name>=<value>\n" line per parameter in
  // name order; the fixture key is the hex sha256 of this string.
  std::string canonical() const;
  std::string key() const;
};

struct TransportResponse {
  int status = 0;  // 0 when the request never got an answer
  std::string body;
  std::string error;
};

using Transport = std::function<TransportResponse(const ApiRequest&)>;

// HTTPS GET through cpp-httplib with a descriptive User-Agent.
Transport http_transport(std::chrono::milliseconds timeout = std::chrono::seconds(20));

// Directory of response bodies named by request key, plus index.json that
// maps each key to its request. Safe to share between threads.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<std::string> get(const ApiRequest& req) const;
  void put(const ApiRequest& req, const std::string& body);
  std::size_t size() const;

 private:
  void write_index() const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, OrderedJson> index_;
};

enum class ApiMode { Live, Record, Replay };

std::string_view api_mode_name(ApiMode m) noexcept;
ApiMode parse_api_mode(std::string_view s);

struct ApiClientOptions {
  ApiMode mode = ApiMode::Replay;
  double requests_per_second = 5.0;
  int max_attempts = 4;
  std::chrono::milliseconds backoff_base{500};
  std::string wikidata_api = "https://www.wikidata.org/w/api.php";
  std::string wikipedia_api = "https://sv.wikipedia.org/w/api.php";
  std::string language = "sv";
};

// Live reads the store first and persists misses; Record always asks the
// network and overwrites; Replay never touches the network and throws
// FixtureMiss. Network failures after the retry budget throw ApiUnavailable.
class ApiClient {
 public:
  ApiClient(ApiClientOptions options, FixtureStore* store, Transport transport = {});

  std::string get(const ApiRequest& req);
  const ApiClientOptions& options() const { return options_; }
  std::size_t network_requests() const { return network_requests_; }

 private:
  void wait_for_slot();

  ApiClientOptions options_;
  FixtureStore* store_;
  Transport transport_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
  std::atomic<std::size_t> network_requests_{0};
};

// ---------------------------------------------------------------------------
// Candidates

enum class DescriptionSource { Wikipedia, WikidataDescription };

std::string_view description_source_name(DescriptionSource s) noexcept;
DescriptionSource parse_description_source(std::string_view s);

struct KgCandidate {
  std::string qid;
  std::string label;
  std::string description_text;  // at most 200 characters
  DescriptionSource description_source = DescriptionSource::WikidataDescription;
  std::optional<LatLon> coordinates;
  bool operator==(const KgCandidate&) const = default;
};

// Coordinates of the first usable P625 statement of an entity's "claims"
// object: preferred rank first, deprecated statements ignored. Returns
// nothing when P625 is absent, has no value or is on another globe than
// Earth. Throws MalformedClaim for structural errors or out-of-range values.
std::optional<LatLon> parse_p625(const Json& claims);

struct EntityDetails {
  std::string qid;
  std::string description;  // knowledge-graph description in the target language
  std::optional<std::string> article_title;
  std::optional<LatLon> coordinates;
};

EntityDetails fetch_entity(const std::string& qid, ApiClient& client);

// First 200 characters of the article in the target language, else the
// knowledge-graph description, else "".
std::pair<std::string, DescriptionSource> fetch_description(const std::string& qid,
                                                            ApiClient& client);

// At most k candidates in search order, each with description and
// coordinates filled in.
std::vector<KgCandidate> search_candidates(const std::string& headword, ApiClient& client,
                                           std::size_t k = kSearchResults);

// ---------------------------------------------------------------------------
// Linking

struct LinkedLocation {
  std::string entry_id;
  std::string headword;
  std::string qid;
  double lat = 0.0;
  double lon = 0.0;
  double similarity = 0.0;
  DescriptionSource source = DescriptionSource::Wikipedia;
  bool operator==(const LinkedLocation&) const = default;
};

OrderedJson link_to_json(const LinkedLocation& l);
LinkedLocation link_from_json(const Json& j);

// Argmax cosine between the entry text and each nonempty candidate
// description (ties to the lower index); linked only if that best candidate
// reaches the threshold and has coordinates.
std::optional<LinkedLocation> link_entry(const Entry& entry, const std::vector<KgCandidate>& candidates,
                                         const Embedder& embedder, double threshold = kLinkThreshold);

// Spelling-reform respelling for the optional query expansion: every
// "Q"/"q" becomes "K"/"k".
std::string respell_q_to_k(std::string_view headword);

struct LinkOptions {
  double threshold = kLinkThreshold;
  std::size_t k = kSearchResults;
  bool qk_expansion = false;  // retry an empty search with respell_q_to_k
  std::size_t max_in_flight = 4;
};

// Links every non-crossref location entry; output follows input order.
std::vector<LinkedLocation> link_entries(const std::vector<Entry>& entries, ApiClient& client,
                                         const Embedder& embedder, const LinkOptions& options = {});

struct GoldLink {
  std::string entry_id;
  std::string qid;
  LatLon coordinates;
};

std::vector<GoldLink> read_link_gold(const std::vector<Json>& records);

struct LinkingMetrics {
  Prf qid_match;
  Prf within_radius;
  OrderedJson to_json() const;
};

// Precision over predicted links whose entry is in the gold sample, recall
// over gold entries. When known_ids is given, gold ids outside it throw
// GoldIdUnknown.
LinkingMetrics evaluate_linking(const std::vector<LinkedLocation>& predicted,
                                const std::vector<GoldLink>& gold, double radius_km = kRadiusKm,
                                const std::unordered_set<std::string>* known_ids = nullptr);

}  // namespace encyclink
