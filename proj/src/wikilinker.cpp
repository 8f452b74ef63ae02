#include "encyclink/wikilinker.hpp"

#include <cmath>
#include <thread>
#include <unordered_map>

#include <httplib.h>

#include "encyclink/error.hpp"
#include "encyclink/hash.hpp"
#include "encyclink/parallel.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

void check_range(const LatLon& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw Error(Errc::RangeError,
                "coordinate out of range: " + std::to_string(p.lat) + ", " + std::to_string(p.lon));
  }
}

double haversine_km(const LatLon& a, const LatLon& b) {
  check_range(a);
  check_range(b);
  constexpr double rad = M_PI / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = std::min(1.0, s1 * s1 + std::cos(a.lat * rad) * std::cos(b.lat * rad) * s2 * s2);
  return 2.0 * kEarthRadiusKm * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

bool is_qid(std::string_view s) {
  if (s.size() < 2 || s[0] != 'Q') return false;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// API access

std::string ApiRequest::canonical() const {
  std::string out = "GET " + url + "\n";
  for (const auto& [k, v] : params) out += k + "=" + v + "\n";
  return out;
}

std::string ApiRequest::key() const { return sha256_hex(canonical()); }

Transport http_transport(std::chrono::milliseconds timeout) {
  return [timeout](const ApiRequest& req) -> TransportResponse {
    const auto scheme_end = req.url.find("://");
    if (scheme_end == std::string::npos) return {0, "", "bad url " + req.url};
    const auto path_start = req.url.find('/', scheme_end + 3);
    const std::string origin = req.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : req.url.substr(path_start);
    httplib::Client cli(origin);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_follow_location(true);
    httplib::Params params(req.params.begin(), req.params.end());
    const httplib::Headers headers = {{"User-Agent", "encyclink/0.1 (batch research pipeline)"}};
    auto res = cli.Get(path, params, headers);
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
  };
}

FixtureStore::FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  const auto index_path = dir_ / "index.json";
  if (!std::filesystem::exists(index_path)) return;
  try {
    const auto j = Json::parse(read_file(index_path));
    for (const auto& [key, rec] : j.at("entries").items()) index_[key] = rec;
  } catch (const Json::exception& e) {
    throw Error(Errc::FormatError, index_path.string() + ": " + e.what());
  }
}

std::optional<std::string> FixtureStore::get(const ApiRequest& req) const {
  std::string file;
  {
    std::lock_guard lock(mutex_);
    auto it = index_.find(req.key());
    if (it == index_.end()) return std::nullopt;
    file = it->second.at("file").get<std::string>();
  }
  return read_file(dir_ / file);
}

void FixtureStore::put(const ApiRequest& req, const std::string& body) {
  const auto key = req.key();
  const std::string file = "responses/" + key + ".json";
  std::lock_guard lock(mutex_);
  write_file_atomic(dir_ / file, body);
  OrderedJson params = OrderedJson::object();
  for (const auto& [k, v] : req.params) params[k] = v;
  index_[key] = OrderedJson{{"url", req.url}, {"params", params}, {"file", file}};
  write_index();
}

std::size_t FixtureStore::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

void FixtureStore::write_index() const {
  OrderedJson entries = OrderedJson::object();
  for (const auto& [k, v] : index_) entries[k] = v;
  const OrderedJson j = {{"format", "encyclink-api-fixtures"}, {"version", 1}, {"entries", entries}};
  write_file_atomic(dir_ / "index.json", j.dump(1) + "\n");
}

std::string_view api_mode_name(ApiMode m) noexcept {
  switch (m) {
    case ApiMode::Live: return "live";
    case ApiMode::Record: return "record";
    case ApiMode::Replay: return "replay";
  }
  return "?";
}

ApiMode parse_api_mode(std::string_view s) {
  if (s == "live") return ApiMode::Live;
  if (s == "record") return ApiMode::Record;
  if (s == "replay") return ApiMode::Replay;
  throw Error(Errc::ConfigError, "unknown api mode '" + std::string(s) + "'");
}

ApiClient::ApiClient(ApiClientOptions options, FixtureStore* store, Transport transport)
    : options_(std::move(options)), store_(store), transport_(std::move(transport)) {
  if (!transport_ && options_.mode != ApiMode::Replay) transport_ = http_transport();
  if (options_.mode == ApiMode::Record && store_ == nullptr) {
    throw Error(Errc::ConfigError, "record mode needs a fixture store");
  }
}

void ApiClient::wait_for_slot() {
  if (options_.requests_per_second <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.requests_per_second));
  std::lock_guard lock(rate_mutex_);
  const auto now = std::chrono::steady_clock::now();
  if (next_slot_ > now) std::this_thread::sleep_until(next_slot_);
  next_slot_ = std::max(now, next_slot_) + interval;
}

std::string ApiClient::get(const ApiRequest& req) {
  if (options_.mode != ApiMode::Record && store_ != nullptr) {
    if (auto body = store_->get(req)) return *body;
  }
  if (options_.mode == ApiMode::Replay) {
    throw Error(Errc::FixtureMiss, "no fixture " + req.key() + " for " + req.canonical());
  }
  std::string last_error;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
    wait_for_slot();
    ++network_requests_;
    const auto res = transport_(req);
    if (res.status == 200) {
      if (store_ != nullptr) store_->put(req, res.body);
      return res.body;
    }
    last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
    const bool retryable = res.status == 0 || res.status == 429 || res.status >= 500;
    if (!retryable) break;
  }
  throw Error(Errc::ApiUnavailable, req.url + ": " + last_error);
}

// ---------------------------------------------------------------------------
// Candidates

std::string_view description_source_name(DescriptionSource s) noexcept {
  return s == DescriptionSource::Wikipedia ? "wikipedia" : "wikidata_description";
}

DescriptionSource parse_description_source(std::string_view s) {
  if (s == "wikipedia") return DescriptionSource::Wikipedia;
  if (s == "wikidata_description") return DescriptionSource::WikidataDescription;
  throw Error(Errc::SchemaMismatch, "unknown description source '" + std::string(s) + "'");
}

std::optional<LatLon> parse_p625(const Json& claims) {
  if (!claims.is_object()) throw Error(Errc::MalformedClaim, "claims is not an object");
  auto it = claims.find("P625");
  if (it == claims.end()) return std::nullopt;
  if (!it->is_array()) throw Error(Errc::MalformedClaim, "P625 is not a statement list");

  const Json* chosen = nullptr;
  for (const auto& st : *it) {
    if (!st.is_object() || !st.contains("mainsnak") || !st["mainsnak"].is_object()) {
      throw Error(Errc::MalformedClaim, "P625 statement without mainsnak");
    }
    const std::string rank = st.value("rank", "normal");
    if (rank == "deprecated") continue;
    if (rank == "preferred") {
      chosen = &st;
      break;
    }
    if (chosen == nullptr) chosen = &st;
  }
  if (chosen == nullptr) return std::nullopt;
  const Json& snak = (*chosen)["mainsnak"];
  if (snak.value("snaktype", "value") != "value") return std::nullopt;
  try {
    const Json& value = snak.at("datavalue").at("value");
    const std::string globe = value.value("globe", "http://www.wikidata.org/entity/Q2");
    if (globe != "Q2" && !globe.ends_with("/Q2")) return std::nullopt;
    const auto& lat = value.at("latitude");
    const auto& lon = value.at("longitude");
    if (!lat.is_number() || !lon.is_number()) {
      throw Error(Errc::MalformedClaim, "P625 latitude/longitude are not numbers");
    }
    LatLon p{lat.get<double>(), lon.get<double>()};
    try {
      check_range(p);
    } catch (const Error& e) {
      throw Error(Errc::MalformedClaim, e.what());
    }
    return p;
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedClaim, std::string("P625 value: ") + e.what());
  }
}

namespace {

Json parse_api_body(const std::string& body, const ApiRequest& req) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    throw Error(Errc::ApiUnavailable, "unparsable response for " + req.key() + ": " + e.what());
  }
  if (j.contains("error")) {
    throw Error(Errc::ApiUnavailable, "API error for " + req.key() + ": " + j["error"].dump());
  }
  return j;
}

std::string truncate_description(const std::string& s) { return utf8::prefix(s, kDescriptionChars); }

std::pair<std::string, DescriptionSource> describe(const EntityDetails& d, ApiClient& client) {
  if (d.article_title) {
    const auto& o = client.options();
    ApiRequest req{o.wikipedia_api,
                   {{"action", "query"},
                    {"prop", "extracts"},
                    {"exintro", "1"},
                    {"explaintext", "1"},
                    {"redirects", "1"},
                    {"titles", *d.article_title},
                    {"format", "json"},
                    {"formatversion", "2"}}};
    const auto j = parse_api_body(client.get(req), req);
    std::string extract;
    if (j.contains("query") && j["query"].contains("pages")) {
      for (const auto& page : j["query"]["pages"]) {
        if (page.contains("extract") && page["extract"].is_string()) {
          extract = page["extract"].get<std::string>();
          break;
        }
      }
    }
    if (!extract.empty()) return {truncate_description(extract), DescriptionSource::Wikipedia};
  }
  return {truncate_description(d.description), DescriptionSource::WikidataDescription};
}

}  // namespace

EntityDetails fetch_entity(const std::string& qid, ApiClient& client) {
  if (!is_qid(qid)) throw Error(Errc::SchemaMismatch, "not a QID: '" + qid + "'");
  const auto& o = client.options();
  ApiRequest req{o.wikidata_api,
                 {{"action", "wbgetentities"},
                  {"ids", qid},
                  {"props", "claims|descriptions|sitelinks"},
                  {"languages", o.language},
                  {"sitefilter", o.language + "wiki"},
                  {"format", "json"}}};
  const auto j = parse_api_body(client.get(req), req);
  EntityDetails d;
  d.qid = qid;
  if (!j.contains("entities") || !j["entities"].contains(qid)) return d;
  const auto& e = j["entities"][qid];
  if (e.contains("missing")) return d;
  if (e.contains("descriptions") && e["descriptions"].contains(o.language)) {
    d.description = e["descriptions"][o.language].value("value", "");
  }
  const auto site = o.language + "wiki";
  if (e.contains("sitelinks") && e["sitelinks"].contains(site)) {
    d.article_title = e["sitelinks"][site].at("title").get<std::string>();
  }
  if (e.contains("claims")) d.coordinates = parse_p625(e["claims"]);
  return d;
}

std::pair<std::string, DescriptionSource> fetch_description(const std::string& qid,
                                                            ApiClient& client) {
  return describe(fetch_entity(qid, client), client);
}

std::vector<KgCandidate> search_candidates(const std::string& headword, ApiClient& client,
                                           std::size_t k) {
  if (k == 0) return {};
  if (headword.empty()) throw Error(Errc::EmptyText, "empty search headword");
  const auto& o = client.options();
  ApiRequest req{o.wikidata_api,
                 {{"action", "wbsearchentities"},
                  {"search", headword},
                  {"language", o.language},
                  {"uselang", o.language},
                  {"type", "item"},
                  {"limit", std::to_string(k)},
                  {"format", "json"}}};
  const auto j = parse_api_body(client.get(req), req);
  std::vector<KgCandidate> out;
  if (!j.contains("search")) return out;
  for (const auto& hit : j["search"]) {
    if (out.size() >= k) break;
    KgCandidate c;
    c.qid = hit.at("id").get<std::string>();
    if (!is_qid(c.qid)) continue;
    c.label = hit.value("label", "");
    const auto details = fetch_entity(c.qid, client);
    std::tie(c.description_text, c.description_source) = describe(details, client);
    c.coordinates = details.coordinates;
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linking

OrderedJson link_to_json(const LinkedLocation& l) {
  return {{"entry_id", l.entry_id},     {"headword", l.headword}, {"qid", l.qid},
          {"lat", l.lat},               {"lon", l.lon},           {"similarity", l.similarity},
          {"source", description_source_name(l.source)}};
}

LinkedLocation link_from_json(const Json& j) {
  try {
    LinkedLocation l;
    l.entry_id = j.at("entry_id").get<std::string>();
    l.headword = j.value("headword", "");
    l.qid = j.at("qid").get<std::string>();
    l.lat = j.at("lat").get<double>();
    l.lon = j.at("lon").get<double>();
    l.similarity = j.at("similarity").get<double>();
    l.source = parse_description_source(j.at("source").get<std::string>());
    return l;
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("link record: ") + e.what());
  }
}

std::optional<LinkedLocation> link_entry(const Entry& entry, const std::vector<KgCandidate>& candidates,
                                         const Embedder& embedder, double threshold) {
  std::vector<std::string> texts = {entry.truncated_text};
  std::vector<std::size_t> which;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].description_text.empty()) continue;
    texts.push_back(candidates[i].description_text);
    which.push_back(i);
  }
  if (which.empty() || entry.truncated_text.empty()) return std::nullopt;
  const auto vs = embedder.embed(texts);
  if (vs[0].norm() == 0.0) return std::nullopt;

  std::optional<std::size_t> best;
  double best_sim = 0.0;
  for (std::size_t k = 0; k < which.size(); ++k) {
    if (vs[k + 1].norm() == 0.0) continue;
    const double s = cosine_similarity(vs[0], vs[k + 1]);
    if (!best || s > best_sim) {
      best = which[k];
      best_sim = s;
    }
  }
  if (!best || best_sim < threshold) return std::nullopt;
  const auto& c = candidates[*best];
  if (!c.coordinates) return std::nullopt;
  return LinkedLocation{entry.id,         entry.headword,  c.qid, c.coordinates->lat,
                        c.coordinates->lon, best_sim, c.description_source};
}

std::string respell_q_to_k(std::string_view headword) {
  std::string out;
  out.reserve(headword.size());
  for (char ch : headword) {
    if (ch == 'Q') {
      out.push_back('K');
    } else if (ch == 'q') {
      out.push_back('k');
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

std::vector<LinkedLocation> link_entries(const std::vector<Entry>& entries, ApiClient& client,
                                         const Embedder& embedder, const LinkOptions& options) {
  std::vector<const Entry*> todo;
  for (const auto& e : entries) {
    if (e.flags.is_location && !e.flags.is_crossref && !e.headword.empty()) todo.push_back(&e);
  }
  std::vector<std::optional<LinkedLocation>> results(todo.size());
  parallel_for(
      todo.size(),
      [&](std::size_t i) {
        const Entry& e = *todo[i];
        auto candidates = search_candidates(e.headword, client, options.k);
        if (candidates.empty() && options.qk_expansion) {
          const auto alt = respell_q_to_k(e.headword);
          if (alt != e.headword) candidates = search_candidates(alt, client, options.k);
        }
        results[i] = link_entry(e, candidates, embedder, options.threshold);
      },
      options.max_in_flight);
  std::vector<LinkedLocation> out;
  for (auto& r : results) {
    if (r) out.push_back(std::move(*r));
  }
  return out;
}

std::vector<GoldLink> read_link_gold(const std::vector<Json>& records) {
  if (records.empty()) throw Error(Errc::SchemaMismatch, "link gold is empty");
  std::vector<GoldLink> out;
  try {
    for (const auto& j : records) {
      GoldLink g{j.at("entry_id").get<std::string>(), j.at("qid").get<std::string>(),
                 {j.at("lat").get<double>(), j.at("lon").get<double>()}};
      if (!is_qid(g.qid)) throw Error(Errc::SchemaMismatch, "gold qid '" + g.qid + "' is malformed");
      check_range(g.coordinates);
      out.push_back(std::move(g));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("link gold: ") + e.what());
  }
  return out;
}

OrderedJson LinkingMetrics::to_json() const {
  return {{"qid_match", qid_match.to_json()}, {"within_radius", within_radius.to_json()}};
}

LinkingMetrics evaluate_linking(const std::vector<LinkedLocation>& predicted,
                                const std::vector<GoldLink>& gold, double radius_km,
                                const std::unordered_set<std::string>* known_ids) {
  std::unordered_map<std::string, const GoldLink*> by_id;
  for (const auto& g : gold) {
    if (known_ids != nullptr && !known_ids->contains(g.entry_id)) {
      throw Error(Errc::GoldIdUnknown, "gold entry '" + g.entry_id + "' is not a known entry");
    }
    by_id[g.entry_id] = &g;
  }
  LinkingMetrics m;
  m.qid_match.gold = m.within_radius.gold = by_id.size();
  for (const auto& p : predicted) {
    auto it = by_id.find(p.entry_id);
    if (it == by_id.end()) continue;
    ++m.qid_match.predicted;
    ++m.within_radius.predicted;
    if (p.qid == it->second->qid) ++m.qid_match.correct;
    if (haversine_km({p.lat, p.lon}, it->second->coordinates) <= radius_km) ++m.within_radius.correct;
  }
  return m;
}

}  // namespace encyclink
