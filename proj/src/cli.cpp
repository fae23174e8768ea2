#include "sqlbound/cli.hpp"

#include "sqlbound/counterexample.hpp"
#include "sqlbound/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sqlbound {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEntryError = 1;
constexpr int kExitConfigError = 2;

struct CommonFlags {
  std::string data_dir = "data";
  std::vector<std::string> configs;
  int bound = 5;
  int timeout_secs = 600;
  int workers = 0;
  std::string solver;
  unsigned seed = 0;
  std::string comparison = "set";
  std::string validator;
  std::string fixture;
  std::string endpoint;
  std::string model;
  std::string audit_path;
  std::string cache_dir;
  std::size_t memory_mb = 4096;
};

void add_data_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--data-dir", f.data_dir, "Directory holding <db_id>/schema.json and CSV files");
}

void add_validator_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--validator", f.validator, "Validator backend for the llm configuration")->check(CLI::IsMember({"remote", "fixture"}));
  app->add_option("--fixture", f.fixture, "Decision fixture file for --validator fixture");
  app->add_option("--endpoint", f.endpoint, "Chat-completions endpoint for --validator remote");
  app->add_option("--model", f.model, "Model name for --validator remote");
}

void add_verify_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--bound", f.bound, "Maximum rows per table")->check(CLI::PositiveNumber);
  app->add_option("--timeout-secs", f.timeout_secs, "Solver timeout per pair")->check(CLI::PositiveNumber);
  app->add_option("--solver", f.solver, "Path to the z3 executable");
  app->add_option("--seed", f.seed, "Solver random seed");
  app->add_option("--comparison", f.comparison, "Result comparison")->check(CLI::IsMember({"bag", "set"}));
  app->add_option("--memory-mb", f.memory_mb, "Solver address-space limit");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A path to an existing file, or the SQL text itself.
std::string sql_argument(const std::string& arg) {
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) return read_text(arg);
  return arg;
}

std::vector<ConfigKind> parse_configs(const std::vector<std::string>& names, std::vector<ConfigKind> fallback) {
  if (names.empty()) return fallback;
  std::vector<ConfigKind> out;
  for (const auto& n : names) {
    const auto c = config_from_string(n);
    if (!c) throw ConfigurationError("unknown configuration '" + n + "' (expected vanilla, rule or llm)");
    if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
  }
  return out;
}

struct ValidatorHolder {
  std::unique_ptr<ValidatorBackend> backend;
  DecisionCache cache;
  std::string cache_path;

  ~ValidatorHolder() {
    if (!cache_path.empty() && cache.size() > 0) {
      try {
        cache.save(cache_path);
      } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << "\n";
      }
    }
  }
};

void make_validator(const CommonFlags& f, bool needed, ValidatorHolder& holder) {
  std::string kind = f.validator;
  if (kind.empty()) kind = f.fixture.empty() ? "remote" : "fixture";
  if (!needed) return;
  if (kind == "fixture") {
    if (f.fixture.empty()) throw ConfigurationError("--validator fixture needs --fixture PATH");
    try {
      holder.backend = std::make_unique<FixtureBackend>(FixtureBackend::from_file(f.fixture));
    } catch (const std::exception& e) {
      throw ConfigurationError(std::string("cannot load fixture: ") + e.what());
    }
    return;
  }
  RemoteConfig rc;
  if (!f.endpoint.empty()) rc.endpoint = f.endpoint;
  if (!f.model.empty()) rc.model = f.model;
  rc.audit_path = f.audit_path;
  if (!std::getenv(rc.api_key_env.c_str()))
    throw ConfigurationError("--validator remote needs the " + rc.api_key_env + " environment variable");
  holder.backend = std::make_unique<RemoteBackend>(rc);
  if (!f.cache_dir.empty()) {
    holder.cache_path = (fs::path(f.cache_dir) / "llm_decisions.json").string();
    if (fs::exists(holder.cache_path)) holder.cache.load(holder.cache_path);
  }
}

ConstraintOptions constraint_options(const CommonFlags& f, ValidatorHolder& holder) {
  ConstraintOptions o;
  o.validator = holder.backend.get();
  o.decision_cache = holder.backend ? &holder.cache : nullptr;
  o.cache_dir = f.cache_dir;
  return o;
}

VerifyOptions verify_options(const CommonFlags& f) {
  VerifyOptions o;
  o.encoder.bound = f.bound;
  o.encoder.mode = *compare_mode_from_string(f.comparison);
  o.solver.z3_path = f.solver;
  o.solver.timeout_secs = f.timeout_secs;
  o.solver.seed = f.seed;
  o.solver.memory_mb = f.memory_mb;
  if (find_solver(o.solver).empty())
    throw ConfigurationError("no z3 executable found (use --solver, SQLBOUND_Z3 or put z3 on PATH)");
  return o;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_mine(const CommonFlags& f, const std::string& db_id, const std::string& out) {
  Catalog catalog(f.data_dir);
  const auto db = catalog.get(db_id);
  const std::string json = constraints_to_json(mine_all(*db)) + "\n";
  if (out.empty())
    std::cout << json;
  else
    std::ofstream(out, std::ios::binary) << json;
  return kExitOk;
}

int run_validate(const CommonFlags& f, const std::string& db_id, const std::string& out) {
  const auto configs = parse_configs(f.configs, {ConfigKind::Llm});
  if (configs.size() != 1) throw ConfigurationError("validate takes a single --config");
  ValidatorHolder holder;
  make_validator(f, configs[0] == ConfigKind::Llm, holder);
  Catalog catalog(f.data_dir);
  const auto db = catalog.get(db_id);
  std::vector<std::string> warnings;
  const ConstraintSet set = mine_and_validate(*db, configs[0], constraint_options(f, holder), warnings);
  print_warnings(warnings);
  const std::string json = constraints_to_json(set) + "\n";
  if (out.empty())
    std::cout << json;
  else
    std::ofstream(out, std::ios::binary) << json;
  return kExitOk;
}

int run_verify(const CommonFlags& f, const std::string& db_id, const std::string& gold, const std::string& pred,
               const std::string& dump_smt, const std::string& cex_out) {
  const auto configs = parse_configs(f.configs, {ConfigKind::Vanilla});
  VerifyOptions vo = verify_options(f);
  vo.dump_smt_path = dump_smt;
  ValidatorHolder holder;
  make_validator(f, std::find(configs.begin(), configs.end(), ConfigKind::Llm) != configs.end(), holder);
  Catalog catalog(f.data_dir);
  const auto db = catalog.get(db_id);
  ConstraintStore store(catalog, constraint_options(f, holder));
  const ParseResult q1 = parse_query(sql_argument(gold), db->schema);
  const ParseResult q2 = parse_query(sql_argument(pred), db->schema);
  int code = kExitOk;
  for (ConfigKind c : configs) {
    VerificationOutcome o;
    try {
      o = verify_pair(q1, q2, db->schema, store.get(db_id, c), vo);
    } catch (const EncoderSoundnessError& e) {
      o.status = VerifyStatus::Error;
      o.detail = std::string("soundness check failed: ") + e.what();
    }
    print_warnings(store.take_warnings());
    std::cout << "-- " << display_name(c) << ": " << to_string(o.status);
    if (o.tie_limited) std::cout << " (tie-limited)";
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << "\n";
    if (o.status == VerifyStatus::Counterexample) {
      std::cout << o.script;
      std::cout << "-- gold result\n" << format_result(*o.result1) << "-- predicted result\n" << format_result(*o.result2);
      if (!cex_out.empty()) {
        fs::path path(cex_out);
        if (configs.size() > 1) path.replace_filename(path.stem().string() + "." + std::string(to_string(c)) + path.extension().string());
        std::ofstream(path, std::ios::binary) << o.script;
      }
    }
    if (o.status == VerifyStatus::Error) code = kExitEntryError;
  }
  return code;
}

int run_evaluate(CommonFlags f, const std::vector<std::string>& benchmarks, const std::string& out, bool strict_accounting) {
  HarnessOptions ho;
  ho.configs = parse_configs(f.configs, {kAllConfigs.begin(), kAllConfigs.end()});
  ho.verify = verify_options(f);
  ho.workers = f.workers;
  if (strict_accounting) ho.accounting = Accounting{false, false, false};

  std::vector<MethodInput> inputs;
  for (const auto& spec : benchmarks) {
    MethodInput in;
    std::string path = spec;
    if (const auto eq = spec.find('='); eq != std::string::npos) {
      in.method = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    } else {
      in.method = fs::path(spec).stem().string();
    }
    if (!fs::is_regular_file(path)) throw ConfigurationError("benchmark file not found: " + path);
    in.entries = load_benchmark(path);
    inputs.push_back(std::move(in));
  }

  fs::create_directories(out);
  if (f.cache_dir.empty()) f.cache_dir = (fs::path(out) / "constraints").string();
  fs::create_directories(f.cache_dir);
  if (f.audit_path.empty()) {
    fs::create_directories(fs::path(out) / "audit");
    f.audit_path = (fs::path(out) / "audit" / "llm.jsonl").string();
  }
  ValidatorHolder holder;
  make_validator(f, std::find(ho.configs.begin(), ho.configs.end(), ConfigKind::Llm) != ho.configs.end(), holder);
  Catalog catalog(f.data_dir);
  ConstraintStore store(catalog, constraint_options(f, holder));
  const Report report = run_suite(inputs, catalog, store, ho);
  write_report(report, out);
  print_warnings(report.warnings);
  std::cout << render_markdown(report);
  return report.errors.empty() ? kExitOk : kExitEntryError;
}

int run_replay(const std::string& cex, const std::string& gold, const std::string& pred, const std::string& comparison) {
  DatabaseInstance db;
  try {
    db = parse_script(read_text(cex));
  } catch (const ScriptError& e) {
    throw ConfigurationError(std::string("cannot read counterexample: ") + e.what());
  }
  const ParseResult q1 = parse_query(sql_argument(gold), db.schema);
  const ParseResult q2 = parse_query(sql_argument(pred), db.schema);
  if (!is_query(q1)) {
    std::cerr << "gold: " << describe(q1) << "\n";
    return kExitEntryError;
  }
  if (!is_query(q2)) {
    std::cerr << "predicted: " << describe(q2) << "\n";
    return kExitEntryError;
  }
  const ResultRelation a = execute(std::get<Query>(q1), db);
  const ResultRelation b = execute(std::get<Query>(q2), db);
  std::cout << "-- gold result\n" << format_result(a) << "-- predicted result\n" << format_result(b);
  std::cout << (results_equal(a, b, *compare_mode_from_string(comparison)) ? "SAME" : "DIFFERS") << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Bounded equivalence checking for text-to-SQL evaluation"};
  app.require_subcommand(1);
  CommonFlags f;
  std::string db_id, out, gold, pred, cex, dump_smt;
  std::vector<std::string> benchmarks;
  bool strict_accounting = false;

  auto* mine = app.add_subcommand("mine", "Print every mined constraint candidate for a database as JSON");
  add_data_flags(mine, f);
  mine->add_option("--db", db_id, "Database id")->required();
  mine->add_option("--out", out, "Output file (stdout when omitted)");

  auto* validate = app.add_subcommand("validate", "Mine and validate constraints under one configuration");
  add_data_flags(validate, f);
  add_validator_flags(validate, f);
  validate->add_option("--db", db_id, "Database id")->required();
  validate->add_option("--config", f.configs, "vanilla, rule or llm (default llm)");
  validate->add_option("--out", out, "Output file (stdout when omitted)");
  validate->add_option("--cache-dir", f.cache_dir, "Directory for cached validator decisions");

  auto* verify = app.add_subcommand("verify", "Check one query pair up to the bound");
  add_data_flags(verify, f);
  add_validator_flags(verify, f);
  add_verify_flags(verify, f);
  verify->add_option("--db", db_id, "Database id")->required();
  verify->add_option("--gold", gold, "Gold SQL file or text")->required();
  verify->add_option("--pred", pred, "Predicted SQL file or text")->required();
  verify->add_option("--config", f.configs, "vanilla, rule or llm; repeatable (default vanilla)");
  verify->add_option("--dump-smt", dump_smt, "Write the SMT-LIB problem to this file");
  verify->add_option("--cex-out", cex, "Write the counterexample script to this file");

  auto* evaluate = app.add_subcommand("evaluate", "Run the benchmark protocol and write reports");
  add_data_flags(evaluate, f);
  add_validator_flags(evaluate, f);
  add_verify_flags(evaluate, f);
  evaluate->add_option("--benchmark", benchmarks, "Benchmark JSONL, optionally as METHOD=PATH; repeatable")->required();
  evaluate->add_option("--config", f.configs, "vanilla, rule or llm; repeatable (default all)");
  evaluate->add_option("--workers", f.workers, "Parallel verification jobs (default: hardware threads)");
  evaluate->add_option("--out", out, "Output directory")->required();
  evaluate->add_flag("--strict-accounting", strict_accounting, "Count timeout, unsupported and error verdicts as incorrect");

  auto* replay = app.add_subcommand("replay", "Execute both queries on a counterexample script");
  replay->add_option("--cex", cex, "Counterexample script")->required();
  replay->add_option("--gold", gold, "Gold SQL file or text")->required();
  replay->add_option("--pred", pred, "Predicted SQL file or text")->required();
  replay->add_option("--comparison", f.comparison, "Result comparison")->check(CLI::IsMember({"bag", "set"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*mine) return run_mine(f, db_id, out);
    if (*validate) return run_validate(f, db_id, out);
    if (*verify) return run_verify(f, db_id, gold, pred, dump_smt, cex);
    if (*evaluate) return run_evaluate(f, benchmarks, out, strict_accounting);
    if (*replay) return run_replay(cex, gold, pred, f.comparison);
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SchemaError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InstanceError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEntryError;
  }
  return kExitOk;
}

}  // namespace sqlbound
