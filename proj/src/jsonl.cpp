#include "encyclink/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "encyclink/error.hpp"

namespace encyclink {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void for_each_jsonl(const fs::path& path, const std::function<void(const Json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(Errc::FormatError,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    fn(j);
  }
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::vector<Json> out;
  for_each_jsonl(path, [&](const Json& j) { out.push_back(j); });
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::IoError, "mkdir " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "rename " + tmp.string() + ": " + ec.message());
}

void write_jsonl_atomic(const fs::path& path, const std::vector<OrderedJson>& records) {
  std::string body;
  for (const auto& r : records) {
    body += r.dump();
    body += '\n';
  }
  write_file_atomic(path, body);
}

}  // namespace encyclink
