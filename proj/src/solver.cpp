#include "sqlbound/solver.hpp"

#include <chrono>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

namespace sqlbound {

namespace fs = std::filesystem;

std::string_view to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Sat: return "sat";
    case SolverStatus::Unsat: return "unsat";
    case SolverStatus::Unknown: return "unknown";
    case SolverStatus::Timeout: return "timeout";
    case SolverStatus::Error: return "error";
  }
  return "?";
}

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : s_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip();
    while (i_ < s_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip();
    if (i_ >= s_.size()) throw ModelParseError("unexpected end of model");
    SExpr e;
    if (s_[i_] == '(') {
      ++i_;
      e.is_list = true;
      skip();
      while (i_ < s_.size() && s_[i_] != ')') {
        e.list.push_back(read());
        skip();
      }
      if (i_ >= s_.size()) throw ModelParseError("unbalanced parentheses in model");
      ++i_;
      return e;
    }
    if (s_[i_] == ')') throw ModelParseError("unexpected ')' in model");
    if (s_[i_] == '|') {
      const auto end = s_.find('|', i_ + 1);
      if (end == std::string_view::npos) throw ModelParseError("unterminated quoted symbol");
      e.atom = std::string(s_.substr(i_ + 1, end - i_ - 1));
      i_ = end + 1;
      return e;
    }
    const std::size_t start = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')') ++i_;
    e.atom = std::string(s_.substr(start, i_ - start));
    return e;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

smt::ModelValue model_value(const SExpr& e) {
  if (!e.is_list) {
    if (e.atom == "true") return true;
    if (e.atom == "false") return false;
    const auto r = parse_rational(e.atom);
    if (!r) throw ModelParseError("unrecognised model value '" + e.atom + "'");
    return *r;
  }
  if (e.list.empty() || e.list[0].is_list) throw ModelParseError("malformed model value");
  const std::string& head = e.list[0].atom;
  auto number = [](const SExpr& x) { return std::get<Rational>(model_value(x)); };
  if (head == "-" && e.list.size() == 2) return Rational(-number(e.list[1]));
  if (head == "-" && e.list.size() == 3) return Rational(number(e.list[1]) - number(e.list[2]));
  if (head == "/" && e.list.size() == 3) {
    const Rational d = number(e.list[2]);
    if (d == 0) throw ModelParseError("division by zero in model value");
    return Rational(number(e.list[1]) / d);
  }
  if (head == "to_real" && e.list.size() == 2) return number(e.list[1]);
  throw ModelParseError("unsupported model value form '" + head + "'");
}

struct FdCloser {
  int fd = -1;
  ~FdCloser() {
    if (fd >= 0) ::close(fd);
  }
};

}  // namespace

smt::Assignment parse_model(std::string_view text) {
  const auto top = SExprReader(text).read_all();
  smt::Assignment out;
  for (const auto& block : top) {
    if (!block.is_list) throw ModelParseError("model is not a list");
    std::vector<const SExpr*> defs;
    const bool single = !block.list.empty() && !block.list[0].is_list && block.list[0].atom == "define-fun";
    if (single) {
      defs.push_back(&block);
    } else {
      for (const auto& d : block.list) {
        if (!d.is_list) {
          if (d.atom == "model") continue;
          throw ModelParseError("unexpected atom '" + d.atom + "' in model");
        }
        defs.push_back(&d);
      }
    }
    for (const SExpr* d : defs) {
      if (d->list.size() != 5 || d->list[0].atom != "define-fun") throw ModelParseError("expected define-fun");
      if (!d->list[2].is_list || !d->list[2].list.empty()) continue;  // function definitions are not cells
      out[d->list[1].atom] = model_value(d->list[4]);
    }
  }
  return out;
}

std::string find_solver(const SolverConfig& config) {
  if (!config.z3_path.empty()) return fs::exists(config.z3_path) ? config.z3_path : std::string();
  if (const char* env = std::getenv("SQLBOUND_Z3"); env && *env && fs::exists(env)) return env;
  if (const char* path = std::getenv("PATH")) {
    std::string_view p(path);
    while (!p.empty()) {
      const auto colon = p.find(':');
      const std::string dir(p.substr(0, colon));
      const fs::path candidate = fs::path(dir.empty() ? "." : dir) / "z3";
      if (::access(candidate.c_str(), X_OK) == 0) return candidate.string();
      if (colon == std::string_view::npos) break;
      p.remove_prefix(colon + 1);
    }
  }
  return {};
}

SolverResult run_solver(const std::string& script, const SolverConfig& config) {
  SolverResult result;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const std::string exe = find_solver(config);
  if (exe.empty()) {
    result.message = "z3 executable not found (set SQLBOUND_Z3 or add z3 to PATH)";
    return result;
  }

  std::string tmpl = (fs::temp_directory_path() / "sqlbound-XXXXXX.smt2").string();
  std::vector<char> name(tmpl.begin(), tmpl.end());
  name.push_back('\0');
  const int file_fd = ::mkstemps(name.data(), 5);
  if (file_fd < 0) {
    result.message = std::string("cannot create temporary file: ") + std::strerror(errno);
    return result;
  }
  const std::string path(name.data());
  struct Remove {
    std::string p;
    ~Remove() {
      std::error_code ec;
      fs::remove(p, ec);
    }
  } remover{path};
  {
    FdCloser closer{file_fd};
    std::size_t off = 0;
    while (off < script.size()) {
      const ssize_t n = ::write(file_fd, script.data() + off, script.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        result.message = std::string("cannot write problem file: ") + std::strerror(errno);
        return result;
      }
      off += static_cast<std::size_t>(n);
    }
  }

  const int timeout = std::max(1, config.timeout_secs);
  std::vector<std::string> args{exe,
                                "-smt2",
                                "smt.random_seed=" + std::to_string(config.seed),
                                "sat.random_seed=" + std::to_string(config.seed),
                                "-T:" + std::to_string(timeout),
                                path};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  int pipe_fd[2];
  if (::pipe2(pipe_fd, O_CLOEXEC) != 0) {
    result.message = std::string("pipe failed: ") + std::strerror(errno);
    return result;
  }
  const rlim_t mem = static_cast<rlim_t>(config.memory_mb) * 1024 * 1024;
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipe_fd[0]);
    ::close(pipe_fd[1]);
    result.message = std::string("fork failed: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    ::dup2(pipe_fd[1], STDOUT_FILENO);
    ::dup2(pipe_fd[1], STDERR_FILENO);
    if (mem > 0) {
      struct rlimit rl{mem, mem};
      ::setrlimit(RLIMIT_AS, &rl);
    }
    ::execv(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(pipe_fd[1]);
  FdCloser reader{pipe_fd[0]};

  std::string output;
  bool killed = false;
  const double wall_limit = timeout + 5.0;
  char buf[65536];
  for (;;) {
    const double left = wall_limit - elapsed();
    if (left <= 0) {
      ::kill(pid, SIGKILL);
      killed = true;
      break;
    }
    struct pollfd pfd{pipe_fd[0], POLLIN, 0};
    const int r = ::poll(&pfd, 1, static_cast<int>(std::min(left, 1.0) * 1000) + 1);
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (r == 0) continue;
    const ssize_t n = ::read(pipe_fd[0], buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.seconds = elapsed();

  if (killed) {
    result.status = SolverStatus::Timeout;
    result.message = "wall-clock limit reached";
    return result;
  }
  const auto nl = output.find('\n');
  std::string first = output.substr(0, nl);
  while (!first.empty() && std::isspace(static_cast<unsigned char>(first.back()))) first.pop_back();
  if (first == "sat") {
    try {
      result.model = parse_model(nl == std::string::npos ? std::string_view() : std::string_view(output).substr(nl + 1));
      result.status = SolverStatus::Sat;
    } catch (const ModelParseError& e) {
      result.status = SolverStatus::Error;
      result.message = std::string("model: ") + e.what();
    }
  } else if (first == "unsat") {
    result.status = SolverStatus::Unsat;
  } else if (first == "timeout") {
    result.status = SolverStatus::Timeout;
  } else if (first == "unknown") {
    result.status = SolverStatus::Unknown;
    result.message = output;
  } else {
    result.status = SolverStatus::Error;
    if (!output.empty())
      result.message = output.substr(0, 2000);
    else if (WIFSIGNALED(status))
      result.message = "solver killed by signal " + std::to_string(WTERMSIG(status));
    else
      result.message = "solver exited without output";
  }
  return result;
}

}  // namespace sqlbound
