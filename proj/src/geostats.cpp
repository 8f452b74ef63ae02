#include "encyclink/geostats.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "encyclink/error.hpp"

namespace encyclink {

BoundarySet BoundarySet::load(const std::filesystem::path& path) {
  BoundarySet set;
  try {
    const auto j = Json::parse(read_file(path));
    if (j.at("format").get<std::string>() != "encyclink-boundaries") {
      throw Error(Errc::FormatError, path.string() + ": not a boundary file");
    }
    set.source_ = j.value("source", "");
    for (const auto& c : j.at("countries")) {
      Country country;
      country.code = c.at("code").get<std::string>();
      country.name = c.at("name").get<std::string>();
      country.continent = c.at("continent").get<std::string>();
      country.centroid = {c.at("centroid").at(0).get<double>(), c.at("centroid").at(1).get<double>()};
      country.bbox_min = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      country.bbox_max = {-country.bbox_min.lat, -country.bbox_min.lon};
      for (const auto& r : c.at("rings")) {
        std::vector<LatLon> ring;
        ring.reserve(r.size());
        for (const auto& pt : r) {
          const LatLon p{pt.at(1).get<double>(), pt.at(0).get<double>()};
          country.bbox_min = {std::min(country.bbox_min.lat, p.lat), std::min(country.bbox_min.lon, p.lon)};
          country.bbox_max = {std::max(country.bbox_max.lat, p.lat), std::max(country.bbox_max.lon, p.lon)};
          ring.push_back(p);
        }
        country.rings.push_back(std::move(ring));
      }
      if (!set.by_code_.emplace(country.code, set.countries_.size()).second) {
        throw Error(Errc::FormatError, path.string() + ": duplicate country code " + country.code);
      }
      set.countries_.push_back(std::move(country));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::FormatError, path.string() + ": " + e.what());
  }
  return set;
}

BoundarySet BoundarySet::load_default() {
  return load(std::filesystem::path(ENCYCLINK_DATA_DIR) / "boundaries" / "ne_110m_countries.json");
}

const Country* BoundarySet::find(const std::string& code) const {
  auto it = by_code_.find(code);
  return it == by_code_.end() ? nullptr : &countries_[it->second];
}

bool contains(const Country& c, const LatLon& p) {
  if (p.lat < c.bbox_min.lat || p.lat > c.bbox_max.lat || p.lon < c.bbox_min.lon ||
      p.lon > c.bbox_max.lon) {
    return false;
  }
  bool inside = false;
  for (const auto& ring : c.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& a = ring[i];
      const auto& b = ring[j];
      if ((a.lat > p.lat) != (b.lat > p.lat) &&
          p.lon < (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon) {
        inside = !inside;
      }
    }
  }
  return inside;
}

std::optional<std::string> assign_country(const LatLon& p, const BoundarySet& boundaries) {
  check_range(p);
  for (const auto& c : boundaries.countries()) {
    if (contains(c, p)) return c.code;
  }
  const Country* best = nullptr;
  double best_km = std::numeric_limits<double>::infinity();
  for (const auto& c : boundaries.countries()) {
    const double d = haversine_km(p, c.centroid);
    if (d < best_km || (d == best_km && best != nullptr && c.code < best->code)) {
      best = &c;
      best_km = d;
    }
  }
  if (best != nullptr && best_km <= kCentroidFallbackKm) return best->code;
  return std::nullopt;
}

OrderedJson GeoSummary::to_json() const {
  OrderedJson countries = OrderedJson::object();
  for (const auto& [k, v] : country_counts) countries[k] = v;
  OrderedJson continents = OrderedJson::object();
  for (const auto& [k, v] : continent_counts) continents[k] = v;
  OrderedJson shares = OrderedJson::object();
  for (const auto& [k, v] : continent_shares) shares[k] = v;
  return {{"edition", edition_name(edition)},   {"total_linked", total_linked},
          {"unassigned", unassigned},           {"country_counts", countries},
          {"continent_counts", continents},     {"continent_shares", shares}};
}

GeoSummary summarize(const std::vector<LinkedLocation>& links, const BoundarySet& boundaries,
                     Edition edition) {
  GeoSummary s;
  s.edition = edition;
  s.total_linked = links.size();
  for (const auto& l : links) {
    const auto code = assign_country({l.lat, l.lon}, boundaries);
    if (!code) {
      ++s.unassigned;
      continue;
    }
    ++s.country_counts[*code];
    ++s.continent_counts[boundaries.find(*code)->continent];
  }
  if (s.assigned() > 0) {
    for (const auto& [continent, n] : s.continent_counts) {
      s.continent_shares[continent] = static_cast<double>(n) / static_cast<double>(s.assigned());
    }
  }
  return s;
}

namespace {

double share_pct(const GeoSummary& s, const std::string& code) {
  auto it = s.country_counts.find(code);
  if (it == s.country_counts.end() || s.assigned() == 0) return 0.0;
  return 100.0 * static_cast<double>(it->second) / static_cast<double>(s.assigned());
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

DeltaRanking country_deltas(const GeoSummary& s1, const GeoSummary& s2, std::size_t top_n) {
  std::map<std::string, int> codes;
  for (const auto& [c, n] : s1.country_counts) codes[c];
  for (const auto& [c, n] : s2.country_counts) codes[c];
  DeltaRanking r;
  for (const auto& [code, unused] : codes) {
    CountryDelta d;
    d.country_code = code;
    d.share_ed1 = share_pct(s1, code);
    d.share_ed2 = share_pct(s2, code);
    d.delta_pp = d.share_ed2 - d.share_ed1;
    r.all.push_back(d);
  }
  std::sort(r.all.begin(), r.all.end(), [](const CountryDelta& a, const CountryDelta& b) {
    return a.delta_pp != b.delta_pp ? a.delta_pp > b.delta_pp : a.country_code < b.country_code;
  });
  for (const auto& d : r.all) {
    if (d.delta_pp > 0.0 && r.increases.size() < top_n) r.increases.push_back(d);
  }
  std::vector<CountryDelta> neg;
  for (const auto& d : r.all) {
    if (d.delta_pp < 0.0) neg.push_back(d);
  }
  std::sort(neg.begin(), neg.end(), [](const CountryDelta& a, const CountryDelta& b) {
    return a.delta_pp != b.delta_pp ? a.delta_pp < b.delta_pp : a.country_code < b.country_code;
  });
  if (neg.size() > top_n) neg.resize(top_n);
  r.decreases = std::move(neg);
  return r;
}

std::string map_geojson(const std::vector<EditionLinks>& editions, const BoundarySet& boundaries) {
  OrderedJson features = OrderedJson::array();
  for (const auto& ed : editions) {
    for (const auto& l : ed.links) {
      const auto code = assign_country({l.lat, l.lon}, boundaries);
      features.push_back(
          {{"type", "Feature"},
           {"geometry", {{"type", "Point"}, {"coordinates", {l.lon, l.lat}}}},
           {"properties",
            {{"edition", edition_name(ed.edition)},
             {"entry_id", l.entry_id},
             {"headword", l.headword},
             {"qid", l.qid},
             {"country", code ? OrderedJson(*code) : OrderedJson(nullptr)}}}});
    }
  }
  const OrderedJson fc = {{"type", "FeatureCollection"}, {"features", features}};
  return fc.dump(1) + "\n";
}

void emit_map_data(const std::vector<EditionLinks>& editions, const BoundarySet& boundaries,
                   const std::filesystem::path& path) {
  write_file_atomic(path, map_geojson(editions, boundaries));
}

std::string continent_shares_csv(const std::vector<GeoSummary>& summaries) {
  std::string out = "edition,continent,count,share\n";
  for (const auto& s : summaries) {
    for (const auto& [continent, n] : s.continent_counts) {
      out += std::string(edition_name(s.edition)) + "," + csv_field(continent) + "," +
             std::to_string(n) + "," + fmt(s.continent_shares.at(continent)) + "\n";
    }
  }
  return out;
}

std::string country_deltas_csv(const DeltaRanking& ranking, const BoundarySet& boundaries) {
  std::string out = "country_code,country_name,share_ed1_pct,share_ed2_pct,delta_pp\n";
  for (const auto& d : ranking.all) {
    const Country* c = boundaries.find(d.country_code);
    out += d.country_code + "," + csv_field(c ? c->name : "") + "," + fmt(d.share_ed1) + "," +
           fmt(d.share_ed2) + "," + fmt(d.delta_pp) + "\n";
  }
  return out;
}

}  // namespace encyclink
