// Stand-in for the external embedding service: reads {"id","text"} lines on
// stdin and answers {"id","vector","dim"} lines using the mock embedder.
// Malformed lines get an error response carrying the line number.

#include <iostream>
#include <string>

#include "encyclink/embedder.hpp"

int main(int argc, char** argv) {
  const std::size_t dim = argc > 1 ? std::stoul(argv[1]) : 256;
  const encyclink::MockEmbedder mock(dim);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(std::cin, line)) {
    ++lineno;
    nlohmann::ordered_json out;
    try {
      const auto req = nlohmann::json::parse(line);
      out["id"] = req.at("id");
      out["vector"] = mock.embed_text(req.at("text").get<std::string>()).values;
      out["dim"] = dim;
    } catch (const std::exception& e) {
      out = {{"error", e.what()}, {"line", lineno}};
    }
    std::cout << out.dump() << '\n' << std::flush;
  }
}
