#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "encyclink/corpus.hpp"
#include "encyclink/wikilinker.hpp"

namespace encyclink {

inline constexpr double kCentroidFallbackKm = 100.0;

struct Country {
  std::string code;  // ISO 3166-1 alpha-2
  std::string name;
  std::string continent;
  LatLon centroid;
  std::vector<std::vector<LatLon>> rings;  // outer rings and holes alike
  LatLon bbox_min, bbox_max;
};

// Modern country boundaries with continent tags, read from the bundled
// file (data/boundaries/ne_110m_countries.json).
class BoundarySet {
 public:
  static BoundarySet load(const std::filesystem::path& path);
  static BoundarySet load_default();

  const std::vector<Country>& countries() const { return countries_; }
  const Country* find(const std::string& code) const;
  const std::string& source() const { return source_; }

 private:
  std::vector<Country> countries_;
  std::map<std::string, std::size_t> by_code_;
  std::string source_;
};

// Even-odd test over every ring of a country, in lon/lat coordinates.
bool contains(const Country& c, const LatLon& p);

// The first country whose polygons contain the point; otherwise the country
// with the nearest centroid if it lies within 100 km; otherwise nothing.
std::optional<std::string> assign_country(const LatLon& p, const BoundarySet& boundaries);

struct GeoSummary {
  Edition edition = Edition::First;
  std::size_t total_linked = 0;
  std::size_t unassigned = 0;
  std::map<std::string, std::size_t> country_counts;
  std::map<std::string, std::size_t> continent_counts;
  // continent count / assigned links; empty when nothing was assigned
  std::map<std::string, double> continent_shares;

  std::size_t assigned() const { return total_linked - unassigned; }
  OrderedJson to_json() const;
};

GeoSummary summarize(const std::vector<LinkedLocation>& links, const BoundarySet& boundaries,
                     Edition edition = Edition::First);

// Shares are percentages of the assigned links of each edition, so
// delta_pp is share_ed2 - share_ed1.
struct CountryDelta {
  std::string country_code;
  double share_ed1 = 0.0;
  double share_ed2 = 0.0;
  double delta_pp = 0.0;
  bool operator==(const CountryDelta&) const = default;
};

struct DeltaRanking {
  std::vector<CountryDelta> all;        // delta descending, ties by code
  std::vector<CountryDelta> increases;  // delta > 0, largest first
  std::vector<CountryDelta> decreases;  // delta < 0, most negative first
};

DeltaRanking country_deltas(const GeoSummary& s1, const GeoSummary& s2, std::size_t top_n = 5);

struct EditionLinks {
  Edition edition = Edition::First;
  std::vector<LinkedLocation> links;
};

// GeoJSON FeatureCollection, one Point feature per link with edition,
// entry_id, headword, qid and assigned country.
std::string map_geojson(const std::vector<EditionLinks>& editions, const BoundarySet& boundaries);
void emit_map_data(const std::vector<EditionLinks>& editions, const BoundarySet& boundaries,
                   const std::filesystem::path& path);

// edition,continent,count,share
std::string continent_shares_csv(const std::vector<GeoSummary>& summaries);
// country_code,country_name,share_ed1_pct,share_ed2_pct,delta_pp
std::string country_deltas_csv(const DeltaRanking& ranking, const BoundarySet& boundaries);

}  // namespace encyclink
