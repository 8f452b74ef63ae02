#pragma once

// Template-generated texts shared by the classifier tests.

#include <random>
#include <string>
#include <vector>

namespace encyclink::testing {

inline const std::vector<std::string>& place_names() {
  static const std::vector<std::string> v = {
      "Kalmar",   "Karlstad", "Kiruna",    "Köping",  "Kungälv", "Kristinehamn", "Kumla",
      "Kalix",    "Karlskoga", "Katrineholm", "Kävlinge", "Kinna", "Klippan", "Kramfors",
      "Krokom",   "Kil",      "Kungsör",   "Kivik",   "Knivsta", "Kolmården", "Kopparberg",
      "Korsholm", "Kosta",    "Kullaberg", "Kummelnäs", "Kyrkhult", "Kåge", "Källby",
      "Kärda",    "Kölingared", "Kvidinge", "Kvillinge", "Kvistofta", "Kärrbo", "Kettilstad",
      "Kimstad",  "Kila",     "Kinnarumma", "Kisa", "Klara", "Klinte", "Klövedal"};
  return v;
}

inline const std::vector<std::string>& person_names() {
  static const std::vector<std::string> v = {
      "Karl",   "Kristina", "Knut",    "Kerstin", "Konrad", "Katarina", "Kjell",  "Klas",
      "Kasper", "Kalle",    "Kettil",  "Kilian",  "Kolbjörn", "Kristian", "Kurt", "Kåre",
      "Kajsa",  "Karin",    "Kamilla", "Kevin",   "Kim",     "Krister", "Kaj",  "Kent"};
  return v;
}

inline const std::vector<std::string>& counties() {
  static const std::vector<std::string> v = {"Kalmar", "Jönköpings", "Malmöhus", "Uppsala",
                                             "Örebro", "Värmlands", "Gävleborgs",
                                             "Norrbottens", "Skaraborgs", "Östergötlands"};
  return v;
}

inline std::string entry_like(std::mt19937_64& rng) {
  static const std::vector<std::string> kinds = {"stad", "köping", "socken", "ort", "by"};
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  const int pop = std::uniform_int_distribution<int>(200, 19000)(rng);
  return pick(place_names()) + ", " + pick(kinds) + " i " + pick(counties()) + " län. " +
         std::to_string(pop) + " inv. (1890).";
}

inline std::string continuation_like(std::mt19937_64& rng) {
  static const std::vector<std::string> openers = {
      "fortsättning av", "vidare om", "och sedan", "men under", "samt även", "hvarefter"};
  static const std::vector<std::string> words = {
      "kyrkan",  "handeln", "bruket",  "kriget",   "hamnen", "skolan", "riket",
      "staden",  "ätten",   "gården",  "landet",   "folket", "tiden",  "verket"};
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  return pick(openers) + " " + pick(words) + " som " + pick(words) + " under " + pick(words) +
         " och " + pick(words) + " hvilket anses";
}

}  // namespace encyclink::testing
