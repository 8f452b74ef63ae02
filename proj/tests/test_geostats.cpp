#include <algorithm>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "encyclink/geostats.hpp"
#include "support.hpp"

using namespace encyclink;
using namespace encyclink::testing;

namespace {

const BoundarySet& world() {
  static const BoundarySet b = BoundarySet::load_default();
  return b;
}

LinkedLocation at(double lat, double lon, std::string id = "x") {
  return {std::move(id), "", "Q1", lat, lon, 0.7, DescriptionSource::Wikipedia};
}

std::vector<LinkedLocation> links50() {
  std::vector<LinkedLocation> out;
  for (const auto& j : read_jsonl(fixture_dir() / "geostats" / "links50.jsonl")) {
    out.push_back(link_from_json(j));
  }
  return out;
}

// representative inland points, checked against the shapely oracle
const std::map<std::string, LatLon>& anchors() {
  static const std::map<std::string, LatLon> m = {
      {"SE", {59.3293, 18.0686}}, {"DE", {52.52, 13.405}},   {"FR", {48.8566, 2.3522}},
      {"GB", {51.5074, -0.1278}}, {"IT", {41.9028, 12.4964}}, {"RU", {55.7558, 37.6173}},
      {"NO", {59.9139, 10.7522}}, {"US", {41.8781, -87.6298}}, {"DK", {56.4532, 9.402}},
      {"FI", {61.4978, 23.761}}};
  return m;
}

std::vector<LinkedLocation> tallied(const std::map<std::string, int>& counts) {
  std::vector<LinkedLocation> out;
  for (const auto& [code, n] : counts) {
    for (int i = 0; i < n; ++i) out.push_back(at(anchors().at(code).lat, anchors().at(code).lon));
  }
  return out;
}

}  // namespace

TEST_CASE("boundary file") {
  CHECK(world().countries().size() == 177);
  REQUIRE(world().find("SE") != nullptr);
  CHECK(world().find("SE")->continent == "Europe");
  CHECK(world().find("US")->continent == "North America");
  CHECK(world().find("ZZ") == nullptr);
}

TEST_CASE("assign_country examples") {
  CHECK(assign_country({59.3293, 18.0686}, world()) == "SE");
  CHECK_FALSE(assign_country({0.0, 0.0}, world()));
  CHECK_ERRC(assign_country({0.0, 200.0}, world()), Errc::RangeError);
}

TEST_CASE("assign_country agrees with the shapely oracle") {
  int n = 0, fallbacks = 0;
  bool coastal = false;
  for (const auto& j : read_jsonl(fixture_dir() / "geostats" / "assign_oracle.jsonl")) {
    const LatLon p{j.at("lat").get<double>(), j.at("lon").get<double>()};
    const auto want = j.at("code").is_null() ? std::nullopt
                                               : std::optional<std::string>(j.at("code").get<std::string>());
    const auto got = assign_country(p, world());
    CHECK_MESSAGE(got == want, p.lat << "," << p.lon);
    if (j.at("how") == "centroid") {
      ++fallbacks;
      // no polygon holds a fallback point
      for (const auto& c : world().countries()) CHECK_FALSE(contains(c, p));
    }
    if (j.contains("coast_km")) {
      coastal = true;
      CHECK(got == "AE");
    }
    ++n;
  }
  CHECK(n > 3000);
  CHECK(fallbacks > 0);
  CHECK(coastal);
}

TEST_CASE("summarize") {
  const auto empty = summarize({}, world());
  CHECK(empty.total_linked == 0);
  CHECK(empty.continent_shares.empty());

  const std::vector<LinkedLocation> four = {at(59.3293, 18.0686), at(59.8586, 17.6389),
                                            at(59.9139, 10.7522), at(41.8781, -87.6298)};
  const auto s = summarize(four, world());
  CHECK(s.country_counts == std::map<std::string, std::size_t>{{"NO", 1}, {"SE", 2}, {"US", 1}});
  CHECK(s.continent_shares == std::map<std::string, double>{{"Europe", 0.75}, {"North America", 0.25}});

  auto with_ocean = four;
  with_ocean.push_back(at(0.0, 0.0));
  const auto o = summarize(with_ocean, world());
  CHECK(o.total_linked == 5);
  CHECK(o.unassigned == 1);
  CHECK(o.continent_shares.at("Europe") == 0.75);
}

TEST_CASE("50-link hand-tallied fixture") {
  const auto links = links50();
  REQUIRE(links.size() == 50);
  const auto s = summarize(links, world(), Edition::Second);
  const std::map<std::string, std::size_t> countries = {
      {"AR", 1}, {"AU", 1}, {"BR", 1}, {"CA", 2}, {"CN", 1}, {"DE", 3}, {"DK", 2}, {"DZ", 1},
      {"EG", 1}, {"ET", 1}, {"FI", 3}, {"FR", 2}, {"GB", 2}, {"IN", 1}, {"IR", 1}, {"JP", 1},
      {"NO", 4}, {"RU", 2}, {"SE", 12}, {"TR", 1}, {"US", 6}, {"ZA", 1}};
  CHECK(s.country_counts == countries);
  CHECK(s.unassigned == 0);
  const std::map<std::string, double> shares = {
      {"Africa", 4.0 / 50}, {"Asia", 5.0 / 50},          {"Europe", 30.0 / 50},
      {"North America", 8.0 / 50}, {"Oceania", 1.0 / 50}, {"South America", 2.0 / 50}};
  CHECK(s.continent_shares == shares);
  double sum = 0.0;
  for (const auto& [k, v] : s.continent_shares) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  // permutation invariance
  auto shuffled = links;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto t = summarize(shuffled, world(), Edition::Second);
  CHECK(t.country_counts == s.country_counts);
  CHECK(t.continent_shares == s.continent_shares);
}

TEST_CASE("country_deltas") {
  SUBCASE("identical summaries") {
    const auto s = summarize(tallied({{"SE", 3}, {"NO", 1}, {"DE", 2}}), world());
    const auto r = country_deltas(s, s);
    CHECK(r.increases.empty());
    CHECK(r.decreases.empty());
    REQUIRE(r.all.size() == 3);
    for (const auto& d : r.all) CHECK(d.delta_pp == 0.0);
    CHECK(r.all[0].country_code == "DE");
    CHECK(r.all[1].country_code == "NO");
    CHECK(r.all[2].country_code == "SE");
  }
  SUBCASE("single mover each way") {
    const auto s1 = summarize(tallied({{"SE", 1}, {"FR", 3}, {"DE", 6}}), world());
    const auto s2 = summarize(tallied({{"SE", 2}, {"FR", 2}, {"DE", 6}}), world());
    const auto r = country_deltas(s1, s2);
    REQUIRE(r.increases.size() == 1);
    CHECK(r.increases[0].country_code == "SE");
    CHECK(r.increases[0].delta_pp == doctest::Approx(10.0));
    REQUIRE(r.decreases.size() == 1);
    CHECK(r.decreases[0].country_code == "FR");
    CHECK(r.decreases[0].delta_pp == doctest::Approx(-10.0));
    for (const auto& d : r.all) CHECK(d.delta_pp == d.share_ed2 - d.share_ed1);
  }
  SUBCASE("fixture with mixed gains and losses") {
    // large European countries lose share; Sweden, the US and Norway gain
    const auto s1 = summarize(tallied({{"SE", 40}, {"DE", 12}, {"FR", 10}, {"GB", 8}, {"IT", 6},
                                       {"RU", 6}, {"NO", 4}, {"US", 4}, {"DK", 5}, {"FI", 5}}),
                              world());
    const auto s2 = summarize(tallied({{"SE", 46}, {"DE", 8}, {"FR", 7}, {"GB", 6}, {"IT", 5},
                                       {"RU", 6}, {"NO", 7}, {"US", 8}, {"DK", 4}, {"FI", 3}}),
                              world());
    const auto r = country_deltas(s1, s2);
    std::vector<std::string> up, down;
    for (const auto& d : r.increases) up.push_back(d.country_code);
    for (const auto& d : r.decreases) down.push_back(d.country_code);
    CHECK(up == std::vector<std::string>{"SE", "US", "NO"});
    // FI/GB tie at -2 and DK/IT at -1; code order decides
    CHECK(down == std::vector<std::string>{"DE", "FR", "FI", "GB", "DK"});
    CHECK(r.increases[0].delta_pp == doctest::Approx(6.0));
    CHECK(r.decreases[0].delta_pp == doctest::Approx(-4.0));
    const auto again = country_deltas(s1, s2);
    CHECK(again.all == r.all);
  }
}

TEST_CASE("map and table outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "encyclink_test_geostats";
  std::filesystem::create_directories(dir);

  emit_map_data({}, world(), dir / "empty.geojson");
  const auto empty = Json::parse(read_file(dir / "empty.geojson"));
  CHECK(empty.at("type") == "FeatureCollection");
  CHECK(empty.at("features").empty());

  std::vector<LinkedLocation> two = {
      {"first/S/1/0", "Stockholm", "Q1754", 59.3293, 18.0686, 0.9, DescriptionSource::Wikipedia},
      {"second/O/2/0", "Ocean", "Q5", 0.0, 0.0, 0.7, DescriptionSource::WikidataDescription}};
  emit_map_data({{Edition::First, {two[0]}}, {Edition::Second, {two[1]}}}, world(), dir / "two.geojson");
  const auto fc = Json::parse(read_file(dir / "two.geojson"));
  REQUIRE(fc.at("features").size() == 2);
  const auto& f0 = fc.at("features").at(0);
  CHECK(f0.at("geometry").at("coordinates") == Json::array({18.0686, 59.3293}));
  CHECK(f0.at("properties").at("edition") == "first");
  CHECK(f0.at("properties").at("headword") == "Stockholm");
  CHECK(f0.at("properties").at("qid") == "Q1754");
  CHECK(f0.at("properties").at("country") == "SE");
  CHECK(fc.at("features").at(1).at("properties").at("country").is_null());

  const auto links = links50();
  const auto render = [&] {
    const auto s = summarize(links, world(), Edition::Second);
    const auto base = summarize(tallied({{"SE", 10}, {"US", 2}}), world(), Edition::First);
    return map_geojson({{Edition::Second, links}}, world()) + continent_shares_csv({base, s}) +
           country_deltas_csv(country_deltas(base, s), world());
  };
  const auto a = render();
  CHECK(a == render());
  const auto golden = read_file(fixture_dir() / "geostats" / "outputs50.golden.txt");
  CHECK(a == golden);

  const auto csv = continent_shares_csv({summarize(links, world(), Edition::Second)});
  CHECK(csv.starts_with("edition,continent,count,share\nsecond,Africa,4,0.08\n"));
  CHECK_ERRC(emit_map_data({}, world(), "/proc/nonexistent/dir/x.geojson"), Errc::IoError);
}
