#include "sqlbound/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace sqlbound {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ConfigKind c) {
  switch (c) {
    case ConfigKind::Vanilla: return "vanilla";
    case ConfigKind::RuleBased: return "rule";
    case ConfigKind::Llm: return "llm";
  }
  return "?";
}

std::string_view display_name(ConfigKind c) {
  switch (c) {
    case ConfigKind::Vanilla: return "Vanilla";
    case ConfigKind::RuleBased: return "RuleBased";
    case ConfigKind::Llm: return "LLM";
  }
  return "?";
}

std::optional<ConfigKind> config_from_string(std::string_view s) {
  const std::string u = upper(s);
  if (u == "VANILLA") return ConfigKind::Vanilla;
  if (u == "RULE" || u == "RULEBASED" || u == "RULE-BASED") return ConfigKind::RuleBased;
  if (u == "LLM") return ConfigKind::Llm;
  return std::nullopt;
}

bool judged_correct(const EntryResult& e, ConfigKind c, const Accounting& acct) {
  if (!e.error.empty() || !e.ex_correct) return false;
  const auto it = e.verification.find(c);
  if (it == e.verification.end()) return false;
  switch (it->second.status) {
    case VerifyStatus::EquivalentUpToBound: return true;
    case VerifyStatus::Counterexample: return false;
    case VerifyStatus::Timeout: return acct.timeout_correct;
    case VerifyStatus::Unsupported: return acct.unsupported_correct;
    case VerifyStatus::Error: return acct.error_correct;
  }
  return false;
}

MethodSummary summarize(const std::string& method, const std::vector<EntryResult>& entries, const std::vector<ConfigKind>& configs,
                        const Accounting& acct) {
  MethodSummary s;
  s.method = method;
  for (ConfigKind c : configs) s.metrics[c];
  for (const auto& e : entries) {
    if (e.method != method) continue;
    ++s.total;
    if (e.error.empty() && e.ex_correct) ++s.ex_correct;
    for (ConfigKind c : configs) {
      auto& m = s.metrics[c];
      if (judged_correct(e, c, acct)) ++m.correct;
      const auto it = e.verification.find(c);
      if (it == e.verification.end()) continue;
      ++m.verified;
      switch (it->second.status) {
        case VerifyStatus::EquivalentUpToBound: ++m.equivalent; break;
        case VerifyStatus::Counterexample:
          ++m.counterexamples;
          m.counterexample_seconds.push_back(it->second.seconds);
          break;
        case VerifyStatus::Timeout: ++m.timeouts; break;
        case VerifyStatus::Unsupported: ++m.unsupported; break;
        case VerifyStatus::Error: ++m.errors; break;
      }
    }
  }
  return s;
}

double accuracy(std::size_t correct, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::string format_fixed(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // nudge by a relative epsilon so values like 1.005 stored as 1.00499.. round up
  const double scaled = v * scale;
  double r = std::round(scaled + std::copysign(1e-9 * std::max(1.0, std::fabs(scaled)), scaled));
  if (r == 0) r = 0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r / scale);
  return buf;
}

std::vector<int> dense_ranks(const std::vector<double>& values) {
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> ranks;
  for (double v : values)
    ranks.push_back(static_cast<int>(std::find(distinct.begin(), distinct.end(), v) - distinct.begin()) + 1);
  return ranks;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

RuntimeRow runtime_row(const MethodSummary& s) {
  RuntimeRow row;
  row.method = s.method;
  for (const auto& [c, m] : s.metrics) {
    RuntimeCell cell;
    if (!m.counterexample_seconds.empty()) {
      cell.mean = mean(m.counterexample_seconds);
      cell.median = median(m.counterexample_seconds);
    }
    row.cells[c] = cell;
  }
  const auto v = row.cells.find(ConfigKind::Vanilla);
  for (auto& [c, cell] : row.cells) {
    if (c == ConfigKind::Vanilla || v == row.cells.end() || !v->second.mean || !cell.mean) continue;
    cell.delta_mean = *cell.mean - *v->second.mean;
  }
  return row;
}

RuntimeRow runtime_mean_row(const std::vector<RuntimeRow>& rows) {
  RuntimeRow out;
  out.method = "Mean";
  std::map<ConfigKind, std::array<std::vector<double>, 3>> cols;
  for (const auto& r : rows)
    for (const auto& [c, cell] : r.cells) {
      auto& col = cols[c];
      if (cell.mean) col[0].push_back(*cell.mean);
      if (cell.median) col[1].push_back(*cell.median);
      if (cell.delta_mean) col[2].push_back(*cell.delta_mean);
    }
  for (const auto& [c, col] : cols) {
    RuntimeCell cell;
    if (!col[0].empty()) cell.mean = mean(col[0]);
    if (!col[1].empty()) cell.median = mean(col[1]);
    if (!col[2].empty()) cell.delta_mean = mean(col[2]);
    out.cells[c] = cell;
  }
  return out;
}

Report build_report(const std::vector<EntryResult>& entries, const std::vector<ConfigKind>& configs, int bound,
                    const std::string& comparison, const Accounting& acct) {
  Report r;
  r.configs = configs;
  r.bound = bound;
  r.comparison = comparison;
  r.accounting = acct;
  r.entries = entries;
  std::vector<std::string> methods;
  for (const auto& e : entries)
    if (std::find(methods.begin(), methods.end(), e.method) == methods.end()) methods.push_back(e.method);
  for (const auto& m : methods) r.methods.push_back(summarize(m, entries, configs, acct));
  for (const auto& e : entries) {
    const std::string where = (e.method.empty() ? "" : e.method + "/") + e.question_id;
    if (!e.error.empty()) r.errors.push_back(where + ": " + e.error);
    for (const auto& [c, v] : e.verification)
      if (v.status == VerifyStatus::Error) r.errors.push_back(where + " [" + std::string(to_string(c)) + "]: " + v.detail);
  }
  return r;
}

namespace {

struct Ranked {
  std::vector<double> ex;
  std::map<ConfigKind, std::vector<double>> by_config;
  std::vector<int> ex_rank;
  std::map<ConfigKind, std::vector<int>> config_rank;
};

Ranked rank_methods(const Report& r) {
  Ranked k;
  for (const auto& m : r.methods) {
    k.ex.push_back(accuracy(m.ex_correct, m.total));
    for (ConfigKind c : r.configs) k.by_config[c].push_back(accuracy(m.metrics.at(c).correct, m.total));
  }
  k.ex_rank = dense_ranks(k.ex);
  for (ConfigKind c : r.configs) k.config_rank[c] = dense_ranks(k.by_config[c]);
  return k;
}

double rounded(double v) { return std::stod(format_fixed(v, 2)); }

std::string opt_fixed(const std::optional<double>& v, bool sign = false) {
  if (!v) return "-";
  std::string s = format_fixed(*v, 2);
  if (sign && s[0] != '-') s = "+" + s;
  return s;
}

}  // namespace

std::string render_markdown(const Report& r) {
  std::ostringstream out;
  const Ranked k = rank_methods(r);
  out << "# Evaluation report\n\n";
  out << "Bound: " << r.bound << " rows per table. Comparison: " << r.comparison << ".\n";
  out << "Unproven verdicts scored as correct: timeout=" << (r.accounting.timeout_correct ? "yes" : "no")
      << ", unsupported=" << (r.accounting.unsupported_correct ? "yes" : "no")
      << ", error=" << (r.accounting.error_correct ? "yes" : "no") << ".\n\n";

  out << "## Accuracy\n\n| Method | Entries | EX Acc. (%) | Rnk |";
  for (ConfigKind c : r.configs) out << ' ' << display_name(c) << " Acc. (%) | Rnk |";
  out << "\n|---|---:|---:|---:|";
  for (std::size_t i = 0; i < r.configs.size(); ++i) out << "---:|---:|";
  out << '\n';
  for (std::size_t i = 0; i < r.methods.size(); ++i) {
    const auto& m = r.methods[i];
    out << "| " << m.method << " | " << m.total << " | " << format_fixed(k.ex[i]) << " | " << k.ex_rank[i] << " |";
    for (ConfigKind c : r.configs)
      out << ' ' << format_fixed(k.by_config.at(c)[i]) << " | " << k.config_rank.at(c)[i] << " |";
    out << '\n';
  }

  out << "\n## Verification outcomes (EX-correct entries only)\n\n";
  out << "| Method | Configuration | Verified | Equivalent | Counterexample | Timeout | Unsupported | Error | Coverage (%) |\n";
  out << "|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& m : r.methods)
    for (ConfigKind c : r.configs) {
      const auto& x = m.metrics.at(c);
      out << "| " << m.method << " | " << display_name(c) << " | " << x.verified << " | " << x.equivalent << " | "
          << x.counterexamples << " | " << x.timeouts << " | " << x.unsupported << " | " << x.errors << " | "
          << format_fixed(accuracy(x.verified - x.unsupported, x.verified)) << " |\n";
    }

  out << "\n## Counterexample runtime (seconds)\n\n| Method |";
  for (ConfigKind c : r.configs) {
    out << ' ' << display_name(c) << " Avg. | Med. |";
    if (c != ConfigKind::Vanilla) out << " ΔAvg. |";
  }
  out << "\n|---|";
  for (ConfigKind c : r.configs) out << (c == ConfigKind::Vanilla ? "---:|---:|" : "---:|---:|---:|");
  out << '\n';
  std::vector<RuntimeRow> rows;
  for (const auto& m : r.methods) rows.push_back(runtime_row(m));
  auto emit_row = [&](const RuntimeRow& row) {
    out << "| " << row.method << " |";
    for (ConfigKind c : r.configs) {
      const auto it = row.cells.find(c);
      const RuntimeCell cell = it == row.cells.end() ? RuntimeCell{} : it->second;
      out << ' ' << opt_fixed(cell.mean) << " | " << opt_fixed(cell.median) << " |";
      if (c != ConfigKind::Vanilla) out << ' ' << opt_fixed(cell.delta_mean, true) << " |";
    }
    out << '\n';
  };
  for (const auto& row : rows) emit_row(row);
  if (rows.size() > 1) emit_row(runtime_mean_row(rows));

  if (!r.warnings.empty()) {
    out << "\n## Warnings\n\n";
    for (const auto& w : r.warnings) out << "- " << w << '\n';
  }
  out << "\n## Errors\n\n";
  if (r.errors.empty()) out << "None.\n";
  for (const auto& e : r.errors) out << "- " << e << '\n';
  return out.str();
}

std::string render_json(const Report& r) {
  const Ranked k = rank_methods(r);
  ordered_json j;
  j["bound"] = r.bound;
  j["comparison"] = r.comparison;
  j["accounting"] = {{"timeout_correct", r.accounting.timeout_correct},
                     {"unsupported_correct", r.accounting.unsupported_correct},
                     {"error_correct", r.accounting.error_correct}};
  j["methods"] = ordered_json::array();
  for (std::size_t i = 0; i < r.methods.size(); ++i) {
    const auto& m = r.methods[i];
    ordered_json mj;
    mj["method"] = m.method;
    mj["entries"] = m.total;
    mj["ex"] = {{"correct", m.ex_correct}, {"accuracy", rounded(k.ex[i])}, {"rank", k.ex_rank[i]}};
    for (ConfigKind c : r.configs) {
      const auto& x = m.metrics.at(c);
      mj[std::string(to_string(c))] = {{"correct", x.correct},
                                       {"accuracy", rounded(k.by_config.at(c)[i])},
                                       {"rank", k.config_rank.at(c)[i]},
                                       {"verified", x.verified},
                                       {"equivalent", x.equivalent},
                                       {"counterexamples", x.counterexamples},
                                       {"timeouts", x.timeouts},
                                       {"unsupported", x.unsupported},
                                       {"errors", x.errors}};
    }
    j["methods"].push_back(std::move(mj));
  }
  j["errors"] = r.errors;
  return j.dump(2) + "\n";
}

std::string render_runtime_json(const Report& r) {
  ordered_json j = ordered_json::array();
  std::vector<RuntimeRow> rows;
  for (const auto& m : r.methods) rows.push_back(runtime_row(m));
  if (rows.size() > 1) rows.push_back(runtime_mean_row(rows));
  for (const auto& row : rows) {
    ordered_json rj;
    rj["method"] = row.method;
    for (const auto& [c, cell] : row.cells) {
      ordered_json cj;
      cj["mean"] = cell.mean ? ordered_json(*cell.mean) : ordered_json(nullptr);
      cj["median"] = cell.median ? ordered_json(*cell.median) : ordered_json(nullptr);
      if (c != ConfigKind::Vanilla) cj["delta_mean"] = cell.delta_mean ? ordered_json(*cell.delta_mean) : ordered_json(nullptr);
      rj[std::string(to_string(c))] = std::move(cj);
    }
    j.push_back(std::move(rj));
  }
  return j.dump(2) + "\n";
}

std::string render_outcomes_jsonl(const Report& r) {
  std::ostringstream out;
  for (const auto& e : r.entries) {
    ordered_json j;
    j["method"] = e.method;
    j["question_id"] = e.question_id;
    j["db_id"] = e.db_id;
    j["ex"] = e.ex_correct;
    if (!e.ex_detail.empty()) j["ex_detail"] = e.ex_detail;
    if (!e.error.empty()) j["error"] = e.error;
    for (ConfigKind c : r.configs) {
      ordered_json v;
      const auto it = e.verification.find(c);
      if (it != e.verification.end()) {
        v["status"] = std::string(to_string(it->second.status));
        if (!it->second.detail.empty()) v["detail"] = it->second.detail;
        if (it->second.tie_limited) v["tie_limited"] = true;
      }
      v["correct"] = judged_correct(e, c, r.accounting);
      j[std::string(to_string(c))] = std::move(v);
    }
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace sqlbound
