#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <future>
#include <thread>

#include <httplib.h>

#include "encyclink/embedder.hpp"
#include "encyclink/error.hpp"

namespace encyclink {

// Child process speaking the line protocol on its stdin/stdout.
struct ExternalEmbedder::Process {
  pid_t pid = -1;
  int to_child = -1;
  FILE* from_child = nullptr;

  explicit Process(const std::string& command) {
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw Error(Errc::ProviderUnavailable, "pipe failed");
    if (pipe(out_pipe) != 0) {
      close(in_pipe[0]);
      close(in_pipe[1]);
      throw Error(Errc::ProviderUnavailable, "pipe failed");
    }
    pid = fork();
    if (pid < 0) throw Error(Errc::ProviderUnavailable, "fork failed");
    if (pid == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child = in_pipe[1];
    from_child = fdopen(out_pipe[0], "r");
  }

  ~Process() {
    if (to_child >= 0) close(to_child);
    if (from_child != nullptr) fclose(from_child);
    if (pid > 0) {
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == 0) {
        kill(pid, SIGTERM);
        waitpid(pid, &status, 0);
      }
    }
  }

  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  bool write_all(const std::string& data) const {
    std::size_t off = 0;
    while (off < data.size()) {
      const auto n = ::write(to_child, data.data() + off, data.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  std::optional<std::string> read_line() const {
    std::string line;
    int c = 0;
    while ((c = fgetc(from_child)) != EOF) {
      if (c == '\n') return line;
      line.push_back(static_cast<char>(c));
    }
    if (line.empty()) return std::nullopt;
    return line;
  }
};

ExternalEmbedder::ExternalEmbedder(EmbeddingProviderSpec spec) : spec_(std::move(spec)) {
  // A dead child must surface as a failed write, not as a signal.
  signal(SIGPIPE, SIG_IGN);
  const auto& ep = spec_.endpoint_or_path;
  if (ep.rfind("http://", 0) != 0 && ep.rfind("https://", 0) != 0 && ep.rfind("stdio:", 0) != 0) {
    throw Error(Errc::ConfigError, "external embedder endpoint must be http(s)://... or stdio:<cmd>");
  }
}

ExternalEmbedder::~ExternalEmbedder() = default;

std::string ExternalEmbedder::provider_tag() const {
  return "external:" + spec_.endpoint_or_path + ":dim=" + std::to_string(spec_.dim);
}

namespace {

std::string request_lines(const std::vector<std::string>& texts, std::size_t first,
                          std::size_t count) {
  std::string body;
  for (std::size_t i = 0; i < count; ++i) {
    body += OrderedJson{{"id", std::to_string(first + i)}, {"text", texts[first + i]}}.dump();
    body += '\n';
  }
  return body;
}

}  // namespace

std::vector<EmbeddingVector> ExternalEmbedder::parse_responses(const std::vector<std::string>& lines,
                                                               std::size_t first,
                                                               std::size_t count) const {
  std::map<std::string, EmbeddingVector> by_id;
  for (const auto& line : lines) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception&) {
      throw Error(Errc::ProviderUnavailable, "unparseable response line from embedding service");
    }
    if (j.contains("error")) {
      throw Error(Errc::ProviderUnavailable,
                  "embedding service error: " + j["error"].dump());
    }
    if (!j.contains("id") || !j.contains("vector")) {
      throw Error(Errc::ProviderUnavailable, "response lacks id or vector");
    }
    const auto values = j.at("vector").get<std::vector<double>>();
    if (values.size() != spec_.dim) {
      throw Error(Errc::DimMismatch, "service returned dim " + std::to_string(values.size()) +
                                         ", expected " + std::to_string(spec_.dim));
    }
    by_id[j.at("id").get<std::string>()] = normalized(values);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto it = by_id.find(std::to_string(first + i));
    if (it == by_id.end()) {
      throw Error(Errc::ProviderUnavailable, "no response for request id " + std::to_string(first + i));
    }
    out.push_back(std::move(it->second));
  }
  return out;
}

std::vector<EmbeddingVector> ExternalEmbedder::embed_batch_http(
    const std::vector<std::string>& texts, std::size_t first) const {
  const std::size_t count = std::min(spec_.batch_size, texts.size() - first);
  const auto& ep = spec_.endpoint_or_path;
  const auto scheme_end = ep.find("://") + 3;
  const auto path_start = ep.find('/', scheme_end);
  const std::string base = path_start == std::string::npos ? ep : ep.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/embed" : ep.substr(path_start);

  httplib::Client cli(base);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(120);
  auto res = cli.Post(path, request_lines(texts, first, count), "application/x-ndjson");
  if (!res) {
    throw Error(Errc::ProviderUnavailable, "embedding service unreachable at " + ep + ": " +
                                               httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(Errc::ProviderUnavailable, "embedding service returned HTTP " +
                                               std::to_string(res->status));
  }
  std::vector<std::string> lines;
  std::size_t pos = 0;
  const auto& body = res->body;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string::npos) nl = body.size();
    lines.push_back(body.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return parse_responses(lines, first, count);
}

std::vector<EmbeddingVector> ExternalEmbedder::embed_batch_stdio(
    const std::vector<std::string>& texts, std::size_t first) const {
  const std::size_t count = std::min(spec_.batch_size, texts.size() - first);
  std::lock_guard lock(process_mutex_);
  if (!process_) process_ = std::make_unique<Process>(spec_.endpoint_or_path.substr(6));

  const auto body = request_lines(texts, first, count);
  bool wrote = false;
  std::thread writer([&] { wrote = process_->write_all(body); });
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < count; ++i) {
    auto line = process_->read_line();
    if (!line) break;
    lines.push_back(std::move(*line));
  }
  writer.join();
  if (!wrote || lines.size() != count) {
    process_.reset();
    throw Error(Errc::ProviderUnavailable, "embedding process closed its stream");
  }
  return parse_responses(lines, first, count);
}

std::vector<EmbeddingVector> ExternalEmbedder::embed(const std::vector<std::string>& texts) const {
  for (const auto& t : texts) {
    if (t.empty()) throw Error(Errc::EmptyText, "cannot embed empty text");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const bool stdio = spec_.endpoint_or_path.rfind("stdio:", 0) == 0;
  if (stdio) {
    for (std::size_t first = 0; first < texts.size(); first += spec_.batch_size) {
      auto batch = embed_batch_stdio(texts, first);
      std::move(batch.begin(), batch.end(), std::back_inserter(out));
    }
    return out;
  }
  // HTTP: up to max_in_flight batches outstanding; results joined in order.
  std::vector<std::future<std::vector<EmbeddingVector>>> pending;
  for (std::size_t first = 0; first < texts.size(); first += spec_.batch_size) {
    if (pending.size() == spec_.max_in_flight) {
      auto batch = pending.front().get();
      pending.erase(pending.begin());
      std::move(batch.begin(), batch.end(), std::back_inserter(out));
    }
    pending.push_back(std::async(std::launch::async,
                                 [this, &texts, first] { return embed_batch_http(texts, first); }));
  }
  for (auto& f : pending) {
    auto batch = f.get();
    std::move(batch.begin(), batch.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace encyclink
