#include "sqlbound/harness.hpp"

#include "sqlbound/executor.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace sqlbound {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string strip_bird_suffix(std::string sql) {
  const auto pos = sql.find("\t----- bird -----");
  if (pos != std::string::npos) sql.resize(pos);
  return sql;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_';
  return out.empty() ? "_" : out;
}

std::string field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

}  // namespace

std::vector<BenchmarkEntry> parse_benchmark(std::string_view jsonl) {
  std::vector<BenchmarkEntry> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    BenchmarkEntry e;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw std::runtime_error("not an object");
      e.question_id = field(j, "question_id");
      e.db_id = field(j, "db_id");
      e.question = field(j, "question");
      e.gold_sql = strip_bird_suffix(field(j, "gold_sql"));
      e.predicted_sql = strip_bird_suffix(field(j, "predicted_sql"));
      if (e.question_id.empty()) e.question_id = "line" + std::to_string(line_no);
      if (e.db_id.empty()) e.error = "missing db_id";
    } catch (const std::exception& ex) {
      e.question_id = "line" + std::to_string(line_no);
      e.error = std::string("malformed benchmark line: ") + ex.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<BenchmarkEntry> load_benchmark(const std::string& path) { return parse_benchmark(read_file(path)); }

Catalog::Catalog(std::string data_dir) : dir_(std::move(data_dir)) {}

std::shared_ptr<const DatabaseInstance> Catalog::get(const std::string& db_id) {
  std::lock_guard lock(mutex_);
  if (const auto it = dbs_.find(db_id); it != dbs_.end()) return it->second;
  if (dir_.empty()) throw InstanceError("unknown database '" + db_id + "'");
  const fs::path dir = fs::path(dir_) / db_id;
  if (!fs::exists(dir / "schema.json")) throw InstanceError("unknown database '" + db_id + "' (no " + (dir / "schema.json").string() + ")");
  auto db = std::make_shared<const DatabaseInstance>(load_database_dir(dir.string()));
  dbs_.emplace(db_id, db);
  return db;
}

void Catalog::add(const std::string& db_id, DatabaseInstance db) {
  std::lock_guard lock(mutex_);
  dbs_[db_id] = std::make_shared<const DatabaseInstance>(std::move(db));
}

ConstraintSet mine_and_validate(const DatabaseInstance& db, ConfigKind config, const ConstraintOptions& options,
                                std::vector<std::string>& warnings) {
  switch (config) {
    case ConfigKind::Vanilla: return {};
    case ConfigKind::RuleBased: return accept_all_strict(mine_all(db, options.mining));
    case ConfigKind::Llm: {
      if (!options.validator) throw ConfigurationError("the llm configuration needs a validator backend");
      ValidationOptions vo;
      vo.mining = options.mining;
      vo.in_flight = options.validator_in_flight;
      vo.cache = options.decision_cache;
      return validate_set(mine_all(db, options.mining), db, *options.validator, vo, warnings);
    }
  }
  return {};
}

ConstraintStore::ConstraintStore(Catalog& catalog, ConstraintOptions options) : catalog_(catalog), options_(std::move(options)) {}

const ConstraintSet& ConstraintStore::get(const std::string& db_id, ConfigKind config) {
  std::lock_guard lock(mutex_);
  const auto key = std::make_pair(db_id, config);
  if (const auto it = sets_.find(key); it != sets_.end()) return it->second;
  const auto db = catalog_.get(db_id);
  ConstraintSet set;
  const fs::path cache = options_.cache_dir.empty()
                             ? fs::path()
                             : fs::path(options_.cache_dir) / (safe_name(db_id) + "." + std::string(to_string(config)) + ".json");
  bool loaded = false;
  if (config != ConfigKind::Vanilla && !cache.empty() && fs::exists(cache)) {
    try {
      set = constraints_from_json(read_file(cache.string()), db->schema);
      loaded = true;
    } catch (const std::exception& e) {
      warnings_.push_back("ignoring unreadable constraint cache " + cache.string() + ": " + e.what());
    }
  }
  if (!loaded) {
    set = mine_and_validate(*db, config, options_, warnings_);
    if (config != ConfigKind::Vanilla && !cache.empty()) write_file(cache, constraints_to_json(set));
  }
  return sets_.emplace(key, std::move(set)).first->second;
}

std::vector<std::string> ConstraintStore::take_warnings() {
  std::lock_guard lock(mutex_);
  return std::exchange(warnings_, {});
}

namespace {

struct Prepared {
  ParseResult gold;
  ParseResult pred;
  std::shared_ptr<const DatabaseInstance> db;
};

// EX stage; returns the parsed pair when verification should follow.
std::optional<Prepared> ex_stage(const BenchmarkEntry& entry, EntryResult& r, Catalog& catalog, const HarnessOptions& options) {
  if (!entry.error.empty()) {
    r.error = entry.error;
    return std::nullopt;
  }
  Prepared p;
  try {
    p.db = catalog.get(entry.db_id);
  } catch (const std::exception& e) {
    r.error = e.what();
    return std::nullopt;
  }
  p.gold = parse_query(entry.gold_sql, p.db->schema);
  p.pred = parse_query(entry.predicted_sql, p.db->schema);
  if (const auto* err = std::get_if<SqlError>(&p.gold)) {
    r.error = "gold SQL: " + err->to_string();
    return std::nullopt;
  }
  if (const auto* u = std::get_if<UnsupportedReport>(&p.gold)) {
    r.ex_detail = "gold outside the supported fragment: " + u->to_string();
    return std::nullopt;
  }
  const CompareMode mode = options.verify.encoder.mode;
  const ExOutcome ex = ex_metric(p.gold, p.pred, *p.db, mode);
  r.ex_correct = ex.equal;
  if (ex.error) {
    if (ex.error->rfind("gold", 0) == 0 || ex.error->rfind("execution error", 0) == 0)
      r.error = *ex.error;
    else
      r.ex_detail = *ex.error;
  } else if (!ex.equal) {
    r.ex_detail = "results differ on the test database";
  }
  if (!r.ex_correct) return std::nullopt;
  return p;
}

VerificationRecord verify_stage(const Prepared& p, ConfigKind config, const std::string& db_id, ConstraintStore& store,
                                const HarnessOptions& options) {
  VerificationRecord rec;
  try {
    const ConstraintSet& constraints = store.get(db_id, config);
    const VerificationOutcome o = verify_pair(p.gold, p.pred, p.db->schema, constraints, options.verify);
    rec.status = o.status;
    rec.detail = o.detail;
    rec.seconds = o.total_seconds;
    rec.counterexample = o.script;
    rec.tie_limited = o.tie_limited;
  } catch (const EncoderSoundnessError& e) {
    rec.status = VerifyStatus::Error;
    rec.detail = std::string("soundness check failed: ") + e.what();
  } catch (const std::exception& e) {
    rec.status = VerifyStatus::Error;
    rec.detail = e.what();
  }
  return rec;
}

}  // namespace

EntryResult evaluate_entry(const BenchmarkEntry& entry, const std::string& method, Catalog& catalog, ConstraintStore& store,
                           const HarnessOptions& options) {
  EntryResult r;
  r.method = method;
  r.question_id = entry.question_id;
  r.db_id = entry.db_id;
  const auto p = ex_stage(entry, r, catalog, options);
  if (!p) return r;
  for (ConfigKind c : options.configs) r.verification[c] = verify_stage(*p, c, entry.db_id, store, options);
  return r;
}

Report run_suite(const std::vector<MethodInput>& inputs, Catalog& catalog, ConstraintStore& store, const HarnessOptions& options) {
  std::vector<EntryResult> results;
  std::vector<std::optional<Prepared>> prepared;
  for (const auto& in : inputs)
    for (const auto& entry : in.entries) {
      EntryResult r;
      r.method = in.method;
      r.question_id = entry.question_id;
      r.db_id = entry.db_id;
      prepared.push_back(ex_stage(entry, r, catalog, options));
      results.push_back(std::move(r));
    }

  // Constraint sets are built up front, one (db, configuration) at a time.
  std::vector<std::string> warnings;
  std::set<std::pair<std::string, ConfigKind>> needed;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (prepared[i])
      for (ConfigKind c : options.configs) needed.emplace(results[i].db_id, c);
  std::set<std::string> failed_dbs;
  for (const auto& [db, c] : needed) {
    try {
      store.get(db, c);
    } catch (const ConfigurationError&) {
      throw;
    } catch (const std::exception& e) {
      warnings.push_back("constraints for " + db + " (" + std::string(to_string(c)) + "): " + e.what());
    }
  }

  struct Job {
    std::size_t entry;
    ConfigKind config;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (prepared[i])
      for (ConfigKind c : options.configs) jobs.push_back({i, c});
  std::vector<VerificationRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      records[k] = verify_stage(*prepared[job.entry], job.config, results[job.entry].db_id, store, options);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(options.workers > 0 ? static_cast<std::size_t>(options.workers) : hw,
                                                      std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t k = 0; k < jobs.size(); ++k) results[jobs[k].entry].verification[jobs[k].config] = std::move(records[k]);

  Report report = build_report(results, options.configs, options.verify.encoder.bound,
                               std::string(to_string(options.verify.encoder.mode)), options.accounting);
  for (auto& w : store.take_warnings()) warnings.push_back(std::move(w));
  report.warnings = std::move(warnings);
  return report;
}

void write_report(const Report& report, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  write_file(root / "report.md", render_markdown(report));
  write_file(root / "report.json", render_json(report));
  write_file(root / "runtime.json", render_runtime_json(report));
  write_file(root / "outcomes.jsonl", render_outcomes_jsonl(report));
  const bool many_methods = report.methods.size() > 1;
  for (const auto& e : report.entries) {
    std::string body;
    for (ConfigKind c : report.configs) {
      const auto it = e.verification.find(c);
      if (it == e.verification.end() || it->second.status != VerifyStatus::Counterexample) continue;
      body += "-- question " + e.question_id + ", configuration " + std::string(to_string(c)) + "\n" + it->second.counterexample + "\n";
    }
    if (body.empty()) continue;
    fs::path path = root / "counterexamples";
    if (many_methods) path /= safe_name(e.method);
    write_file(path / (safe_name(e.question_id) + ".sql"), body);
  }
}

}  // namespace sqlbound
