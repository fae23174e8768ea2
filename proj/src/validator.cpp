#include "sqlbound/validator.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace sqlbound {

using nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::Repair: return "repair";
  }
  return "?";
}

namespace {

std::string stat(const std::optional<Value>& v) { return v ? v->to_display() : "n/a"; }

std::string stat(const std::optional<Rational>& r, ColumnType type) {
  if (!r) return "n/a";
  if (type == ColumnType::Date && boost::multiprecision::denominator(*r) == 1)
    return format_iso_date(static_cast<std::int64_t>(boost::multiprecision::numerator(*r)));
  return format_rational(*r);
}

std::optional<Rational> parse_bound(const json& j, ColumnType type) {
  if (j.is_null()) return std::nullopt;
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) {
    if (auto r = parse_rational(j.dump())) return r;
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (type == ColumnType::Date)
      if (auto d = parse_iso_date(s)) return Rational(*d);
    if (auto r = parse_rational(s)) return r;
  }
  throw DecisionParseError("bound is not a number: " + j.dump());
}

ColumnType bound_type_of(const ValidationRequest& req) {
  return req.profiles.empty() ? ColumnType::Real : req.profiles.front().type;
}

}  // namespace

std::string build_prompt(const ValidationRequest& req) {
  std::ostringstream out;
  const MinedConstraint& c = req.constraint;
  out << "You are reviewing an integrity constraint that was mined automatically from a sample database.\n"
      << "Decide whether it should hold for every realistic database of this schema, not only for the sample.\n\n";
  out << "Constraint kind: " << c.kind() << "\n";
  out << "Constraint id: " << c.identity() << "\n";
  out << "Statement: " << c.describe() << "\n";
  if (std::holds_alternative<FdConstraint>(c.body))
    out << "Question: is this dependency a genuine relationship of the domain, or a coincidence of the sample?\n";
  if (std::holds_alternative<RangeConstraint>(c.body)) {
    out << "Candidate bounds:\n";
    for (const auto& v : req.variants) {
      const auto& r = std::get<RangeConstraint>(v.body);
      if (r.variant == RangeVariant::Semantic) continue;
      const ColumnType type = bound_type_of(req);
      out << "  " << to_string(r.variant) << ": [" << stat(r.min, type) << ", " << stat(r.max, type) << "]\n";
    }
    out << "Question: are the strict bounds too restrictive? If so, repair them with domain-appropriate bounds "
           "(for example [0, 120] for an age, or a one-sided bound with max null). "
           "A repaired interval must contain every observed value.\n";
  }
  for (const auto& p : req.profiles) {
    out << "\nColumn " << p.table << "." << p.column << " (" << to_string(p.type) << (p.primary_key ? ", primary key" : "")
        << ")\n";
    out << "  description: " << (p.description.empty() ? "(none)" : p.description) << "\n";
    out << "  rows: " << p.row_count << ", nulls: " << p.null_count << ", distinct: " << p.distinct_count << "\n";
    out << "  min: " << stat(p.min) << ", max: " << stat(p.max) << "\n";
    if (p.q1) out << "  q1: " << stat(p.q1, p.type) << ", q3: " << stat(p.q3, p.type) << "\n";
    out << "  sample values:";
    if (p.samples.empty()) out << " (none)";
    for (std::size_t i = 0; i < p.samples.size(); ++i) out << (i ? ", " : " ") << p.samples[i].to_sql();
    out << "\n";
  }
  out << "\nRespond with a single JSON object and nothing else, using this schema:\n"
      << R"({ "verdict": "accept|reject|repair", "bounds": {"min": number|null, "max": number|null}, "rationale": string })"
      << "\n"
      << "Use \"repair\" only for range constraints; \"bounds\" is ignored for other verdicts.\n";
  return out.str();
}

ValidationDecision parse_decision(std::string_view text, ColumnType bound_type) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DecisionParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("verdict") || !j["verdict"].is_string())
    throw DecisionParseError("response lacks a string 'verdict'");
  ValidationDecision d;
  const auto verdict = j["verdict"].get<std::string>();
  if (verdict == "accept")
    d.verdict = Verdict::Accept;
  else if (verdict == "reject")
    d.verdict = Verdict::Reject;
  else if (verdict == "repair")
    d.verdict = Verdict::Repair;
  else
    throw DecisionParseError("unknown verdict '" + verdict + "'");
  if (d.verdict == Verdict::Repair) {
    if (!j.contains("bounds") || !j["bounds"].is_object()) throw DecisionParseError("repair without a 'bounds' object");
    d.min = parse_bound(j["bounds"].value("min", json(nullptr)), bound_type);
    d.max = parse_bound(j["bounds"].value("max", json(nullptr)), bound_type);
  }
  if (j.contains("variant") && j["variant"].is_string()) {
    const auto v = j["variant"].get<std::string>();
    if (v == "strict") d.variant = RangeVariant::Strict;
    else if (v == "loose") d.variant = RangeVariant::Loose;
    else if (v == "semantic") d.variant = RangeVariant::Semantic;
    else throw DecisionParseError("unknown variant '" + v + "'");
  }
  if (j.contains("rationale") && j["rationale"].is_string()) d.rationale = j["rationale"].get<std::string>();
  d.raw = std::string(text);
  return d;
}

std::string decision_to_json(const ValidationDecision& d) {
  json j;
  j["verdict"] = to_string(d.verdict);
  if (d.verdict == Verdict::Repair)
    j["bounds"] = {{"min", d.min ? json(format_rational(*d.min)) : json(nullptr)},
                   {"max", d.max ? json(format_rational(*d.max)) : json(nullptr)}};
  if (d.variant) j["variant"] = to_string(*d.variant);
  j["rationale"] = d.rationale;
  return j.dump();
}

// ------------------------------------------------------------- fixture

FixtureBackend FixtureBackend::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed fixture file: ") + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error("fixture file must be a JSON object keyed by constraint identity");
  FixtureBackend backend;
  for (const auto& [key, value] : doc.items()) backend.entries_[key] = value.dump();
  return backend;
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::optional<ValidationDecision> FixtureBackend::decide(const ValidationRequest& request, std::vector<std::string>& warnings) {
  const auto it = entries_.find(request.constraint.identity());
  if (it == entries_.end()) return std::nullopt;
  try {
    return parse_decision(it->second, bound_type_of(request));
  } catch (const DecisionParseError& e) {
    warnings.push_back("fixture entry " + it->first + ": " + e.what());
    return std::nullopt;
  }
}

// -------------------------------------------------------------- remote

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {}

void RemoteBackend::audit(const std::string& identity, const std::string& request, const std::string& response,
                          const std::string& status) {
  if (config_.audit_path.empty()) return;
  json line = {{"identity", identity}, {"model", config_.model}, {"status", status}};
  try {
    line["request"] = json::parse(request);
  } catch (const json::exception&) {
    line["request"] = request;
  }
  line["response"] = response;
  std::lock_guard<std::mutex> lock(audit_mutex_);
  std::ofstream out(config_.audit_path, std::ios::app);
  out << line.dump() << "\n";
}

std::optional<std::string> RemoteBackend::post(const std::string& body, std::vector<std::string>& warnings,
                                               const std::string& identity) {
  const auto scheme_end = config_.endpoint.find("://");
  const auto path_start = config_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? config_.endpoint : config_.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_secs, 0);
  client.set_read_timeout(config_.timeout_secs, 0);
  client.set_write_timeout(config_.timeout_secs, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_delay_ms * (1 << (attempt - 1))));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      const std::string err = httplib::to_string(res.error());
      audit(identity, body, "", "transport error: " + err);
      warnings.push_back(identity + ": request failed (" + err + ")");
      continue;
    }
    audit(identity, body, res->body, "http " + std::to_string(res->status));
    if (res->status == 200) return res->body;
    warnings.push_back(identity + ": HTTP " + std::to_string(res->status));
    if (res->status != 429 && res->status < 500) return std::nullopt;  // not retryable
  }
  return std::nullopt;
}

std::optional<ValidationDecision> RemoteBackend::decide(const ValidationRequest& request, std::vector<std::string>& warnings) {
  const std::string identity = request.constraint.identity();
  json messages = json::array();
  messages.push_back({{"role", "system"},
                      {"content", "You validate database integrity constraints. Answer with one JSON object only."}});
  messages.push_back({{"role", "user"}, {"content", build_prompt(request)}});
  for (int ask = 0; ask < 2; ++ask) {
    json body = {{"model", config_.model},
                 {"messages", messages},
                 {"temperature", 0},
                 {"response_format", {{"type", "json_object"}}}};
    const auto response = post(body.dump(), warnings, identity);
    if (!response) return std::nullopt;
    std::string content;
    try {
      const json r = json::parse(*response);
      content = r.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      warnings.push_back(identity + ": unexpected response shape (" + e.what() + ")");
      return std::nullopt;
    }
    try {
      return parse_decision(content, bound_type_of(request));
    } catch (const DecisionParseError& e) {
      warnings.push_back(identity + ": " + e.what() + (ask == 0 ? "; asking again" : ""));
      messages.push_back({{"role", "assistant"}, {"content", content}});
      messages.push_back({{"role", "user"},
                          {"content", std::string("That response was not usable (") + e.what() +
                                          "). Reply with only the JSON object in the required schema."}});
    }
  }
  return std::nullopt;
}

// --------------------------------------------------------------- cache

std::optional<ValidationDecision> DecisionCache::get(const std::string& identity) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find(identity);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void DecisionCache::put(const std::string& identity, const ValidationDecision& decision) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[identity] = decision;
}

std::size_t DecisionCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

void DecisionCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const json doc = json::parse(buffer.str());
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& [key, value] : doc.items()) {
    ValidationDecision d = parse_decision(value.at("decision").dump(), ColumnType::Real);
    d.raw = value.value("raw", std::string());
    entries_[key] = d;
  }
}

void DecisionCache::save(const std::string& path) const {
  json doc = json::object();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [key, d] : entries_) doc[key] = {{"decision", json::parse(decision_to_json(d))}, {"raw", d.raw}};
  }
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

// ------------------------------------------------------------ validate

namespace {

bool contains_interval(const std::optional<Rational>& lo, const std::optional<Rational>& hi, const RangeConstraint& strict) {
  if (lo && (!strict.min || *lo > *strict.min)) return false;
  if (hi && (!strict.max || *hi < *strict.max)) return false;
  return true;
}

struct Group {
  std::vector<std::size_t> members;  // indices into candidates
};

void apply_default(ConstraintSet& out, const ConstraintSet& candidates, const Group& g) {
  bool kept = false;
  for (std::size_t i : g.members) {
    MinedConstraint c = candidates[i];
    const auto* r = std::get_if<RangeConstraint>(&c.body);
    const bool keep = !r || (r->variant == RangeVariant::Strict && !kept);
    c.status = keep ? Status::Accepted : Status::Rejected;
    kept = kept || keep;
    c.undecided = true;
    out.push_back(std::move(c));
  }
}

}  // namespace

ConstraintSet validate_set(const ConstraintSet& candidates, const DatabaseInstance& db, ValidatorBackend& backend,
                           const ValidationOptions& options, std::vector<std::string>& warnings) {
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto id = candidates[i].identity();
    if (!groups.count(id)) order.push_back(id);
    groups[id].members.push_back(i);
  }

  std::vector<std::optional<ValidationDecision>> decisions(order.size());
  std::vector<std::vector<std::string>> group_warnings(order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= order.size()) return;
      const Group& g = groups.at(order[k]);
      ValidationRequest req;
      req.constraint = candidates[g.members.front()];
      for (std::size_t i : g.members) {
        const auto* r = std::get_if<RangeConstraint>(&candidates[i].body);
        if (!r) continue;
        req.variants.push_back(candidates[i]);
        if (r->variant == RangeVariant::Strict) req.constraint = candidates[i];
      }
      for (const auto& col : req.constraint.columns())
        req.profiles.push_back(profile_column(db, req.constraint.table(), col, options.mining));
      if (options.cache)
        if (auto hit = options.cache->get(order[k])) {
          decisions[k] = hit;
          continue;
        }
      try {
        decisions[k] = backend.decide(req, group_warnings[k]);
      } catch (const std::exception& e) {
        group_warnings[k].push_back(order[k] + ": validator error: " + e.what());
      }
      if (decisions[k] && options.cache) options.cache->put(order[k], *decisions[k]);
    }
  };
  const int threads = std::max(1, std::min<int>(options.in_flight, static_cast<int>(order.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ConstraintSet out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (auto& w : group_warnings[k]) warnings.push_back(std::move(w));
    const Group& g = groups.at(order[k]);
    const auto& decision = decisions[k];
    if (!decision) {
      warnings.push_back(order[k] + ": undecided, accepted with strict bounds");
      apply_default(out, candidates, g);
      continue;
    }
    const bool is_range = std::holds_alternative<RangeConstraint>(candidates[g.members.front()].body);
    if (decision->verdict == Verdict::Reject) {
      for (std::size_t i : g.members) {
        MinedConstraint c = candidates[i];
        c.status = Status::Rejected;
        out.push_back(std::move(c));
      }
      continue;
    }
    if (decision->verdict == Verdict::Repair) {
      const RangeConstraint* strict = nullptr;
      for (std::size_t i : g.members) {
        const auto* r = std::get_if<RangeConstraint>(&candidates[i].body);
        if (r && r->variant == RangeVariant::Strict) strict = r;
      }
      if (!is_range || !strict) {
        warnings.push_back(order[k] + ": repair is only valid for range constraints; using the default");
        apply_default(out, candidates, g);
        continue;
      }
      if (!contains_interval(decision->min, decision->max, *strict)) {
        warnings.push_back(order[k] + ": repaired bounds do not contain the observed range; using the default");
        apply_default(out, candidates, g);
        continue;
      }
      bool placed = false;
      for (std::size_t i : g.members) {
        MinedConstraint c = candidates[i];
        auto& r = std::get<RangeConstraint>(c.body);
        if (r.variant == RangeVariant::Semantic && !placed) {
          r.min = decision->min;
          r.max = decision->max;
          c.provenance = Provenance::LlmRepaired;
          c.status = Status::Accepted;
          placed = true;
        } else {
          c.status = Status::Rejected;
        }
        out.push_back(std::move(c));
      }
      if (!placed) {
        MinedConstraint c;
        c.body = RangeConstraint{strict->table, strict->column, decision->min, decision->max, RangeVariant::Semantic};
        c.provenance = Provenance::LlmRepaired;
        c.status = Status::Accepted;
        out.push_back(std::move(c));
      }
      continue;
    }
    // accept
    RangeVariant wanted = decision->variant.value_or(RangeVariant::Strict);
    if (is_range && wanted == RangeVariant::Semantic) {
      warnings.push_back(order[k] + ": semantic variant accepted without bounds; keeping strict bounds");
      wanted = RangeVariant::Strict;
    }
    bool kept = false;
    for (std::size_t i : g.members) {
      MinedConstraint c = candidates[i];
      const auto* r = std::get_if<RangeConstraint>(&c.body);
      const bool keep = !r || (r->variant == wanted && !kept);
      c.status = keep ? Status::Accepted : Status::Rejected;
      kept = kept || keep;
      out.push_back(std::move(c));
    }
  }
  sort_constraints(out);
  return out;
}

ConstraintSet accept_all_strict(const ConstraintSet& candidates) {
  ConstraintSet out;
  for (auto c : candidates) {
    const auto* r = std::get_if<RangeConstraint>(&c.body);
    c.status = (!r || r->variant == RangeVariant::Strict) ? Status::Accepted : Status::Rejected;
    out.push_back(std::move(c));
  }
  sort_constraints(out);
  return out;
}

}  // namespace sqlbound
