#include "sqlbound/validator.hpp"

#include <httplib.h>
#include <json.hpp>

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace sqlbound;
using nlohmann::json;

namespace {

DatabaseInstance financial() { return load_database_dir(std::string(SQLBOUND_TEST_DATA) + "/financial"); }

const MinedConstraint* find(const ConstraintSet& cs, const std::string& identity, Status status) {
  for (const auto& c : cs)
    if (c.identity() == identity && c.status == status) return &c;
  return nullptr;
}

class MapBackend : public ValidatorBackend {
 public:
  std::map<std::string, std::string> answers;
  std::atomic<int> calls{0};
  std::optional<ValidationDecision> decide(const ValidationRequest& r, std::vector<std::string>&) override {
    ++calls;
    const auto it = answers.find(r.constraint.identity());
    if (it == answers.end()) return std::nullopt;
    return parse_decision(it->second);
  }
};

}  // namespace

TEST(Decision, ParsesVerdictsAndBounds) {
  const auto d = parse_decision(R"({"verdict": "repair", "bounds": {"min": 8000, "max": null}, "rationale": "r"})");
  EXPECT_EQ(d.verdict, Verdict::Repair);
  EXPECT_EQ(*d.min, Rational(8000));
  EXPECT_FALSE(d.max);
  EXPECT_EQ(d.rationale, "r");
  EXPECT_EQ(*parse_decision(R"({"verdict": "repair", "bounds": {"min": "2.5", "max": 7.25}})").max, Rational(29, 4));
  const auto date = parse_decision(R"({"verdict": "repair", "bounds": {"min": "1970-01-01", "max": null}})", ColumnType::Date);
  EXPECT_EQ(*date.min, Rational(719162));
  EXPECT_EQ(parse_decision(R"({"verdict": "accept", "variant": "loose"})").variant, RangeVariant::Loose);
}

TEST(Decision, RejectsMalformedResponses) {
  EXPECT_THROW(parse_decision("not json"), DecisionParseError);
  EXPECT_THROW(parse_decision(R"({"verdict": "maybe"})"), DecisionParseError);
  EXPECT_THROW(parse_decision(R"({"verdict": "repair"})"), DecisionParseError);
  EXPECT_THROW(parse_decision(R"({"verdict": "repair", "bounds": {"min": "abc"}})"), DecisionParseError);
  EXPECT_THROW(parse_decision(R"(["accept"])"), DecisionParseError);
}

TEST(Decision, JsonRoundTrip) {
  const auto d = parse_decision(R"({"verdict": "repair", "bounds": {"min": 1, "max": 2}, "rationale": "x"})");
  auto back = parse_decision(decision_to_json(d));
  back.raw = d.raw;
  EXPECT_EQ(back, d);
}

TEST(Prompt, CarriesStatisticsAndCandidateBounds) {
  const auto db = financial();
  const auto all = mine_all(db);
  ValidationRequest req;
  for (const auto& c : all)
    if (c.identity() == "range:DISTRICT.A11") {
      req.variants.push_back(c);
      if (std::get<RangeConstraint>(c.body).variant == RangeVariant::Strict) req.constraint = c;
    }
  req.profiles.push_back(profile_column(db, "DISTRICT", "A11"));
  const std::string p = build_prompt(req);
  EXPECT_NE(p.find("range:DISTRICT.A11"), std::string::npos);
  EXPECT_NE(p.find("[8110, 12541]"), std::string::npos);
  EXPECT_NE(p.find("average salary"), std::string::npos);
  EXPECT_NE(p.find("\"verdict\""), std::string::npos);
}

TEST(Validate, FixtureRepairsA11AndDefaultsTheRest) {
  const auto db = financial();
  auto backend = FixtureBackend::from_file(std::string(SQLBOUND_TEST_DATA) + "/llm_decisions.json");
  std::vector<std::string> warnings;
  const auto out = validate_set(mine_all(db), db, backend, {}, warnings);
  const auto* repaired = find(out, "range:DISTRICT.A11", Status::Accepted);
  ASSERT_TRUE(repaired);
  const auto& r = std::get<RangeConstraint>(repaired->body);
  EXPECT_EQ(r.variant, RangeVariant::Semantic);
  EXPECT_EQ(repaired->provenance, Provenance::LlmRepaired);
  EXPECT_EQ(*r.min, Rational(8000));
  EXPECT_TRUE(find(out, "categorical:DISP.TYPE", Status::Accepted));
  EXPECT_TRUE(find(out, "categorical:DISP.TYPE", Status::Accepted)->undecided);
  for (const auto& c : out) EXPECT_NE(c.status, Status::Candidate);
  int accepted_ranges = 0;
  for (const auto& c : out)
    if (c.identity() == "range:DISTRICT.A11" && c.status == Status::Accepted) ++accepted_ranges;
  EXPECT_EQ(accepted_ranges, 1);
  EXPECT_FALSE(warnings.empty());
}

TEST(Validate, RepairThatExcludesObservedValuesFallsBack) {
  const auto db = financial();
  MapBackend backend;
  backend.answers["range:DISTRICT.A11"] = R"({"verdict": "repair", "bounds": {"min": 9000, "max": 10000}})";
  std::vector<std::string> warnings;
  const auto out = validate_set(mine_all(db), db, backend, {}, warnings);
  const auto* kept = find(out, "range:DISTRICT.A11", Status::Accepted);
  ASSERT_TRUE(kept);
  EXPECT_EQ(std::get<RangeConstraint>(kept->body).variant, RangeVariant::Strict);
  EXPECT_TRUE(kept->undecided);
}

TEST(Validate, RejectAndAcceptVariant) {
  const auto db = financial();
  MapBackend backend;
  backend.answers["range:DISTRICT.A11"] = R"({"verdict": "accept", "variant": "loose"})";
  backend.answers["categorical:DISP.TYPE"] = R"({"verdict": "reject"})";
  std::vector<std::string> warnings;
  const auto out = validate_set(mine_all(db), db, backend, {}, warnings);
  EXPECT_TRUE(find(out, "categorical:DISP.TYPE", Status::Rejected));
  EXPECT_FALSE(find(out, "categorical:DISP.TYPE", Status::Accepted));
  const auto* a11 = find(out, "range:DISTRICT.A11", Status::Accepted);
  ASSERT_TRUE(a11);
  EXPECT_EQ(std::get<RangeConstraint>(a11->body).variant, RangeVariant::Loose);
  EXPECT_FALSE(a11->undecided);
}

TEST(Validate, CacheAvoidsRepeatedCalls) {
  const auto db = financial();
  MapBackend backend;
  backend.answers["categorical:DISP.TYPE"] = R"({"verdict": "reject"})";
  DecisionCache cache;
  ValidationOptions o;
  o.cache = &cache;
  o.in_flight = 4;
  std::vector<std::string> warnings;
  const auto first = validate_set(mine_all(db), db, backend, o, warnings);
  const int calls = backend.calls;
  EXPECT_EQ(cache.size(), 1u);
  const auto second = validate_set(mine_all(db), db, backend, o, warnings);
  EXPECT_EQ(first, second);
  EXPECT_EQ(backend.calls - calls, calls - 1);

  const auto path = std::filesystem::temp_directory_path() / "sqlbound_cache_test.json";
  cache.save(path.string());
  DecisionCache loaded;
  loaded.load(path.string());
  EXPECT_EQ(loaded.get("categorical:DISP.TYPE")->verdict, Verdict::Reject);
  std::filesystem::remove(path);
}

TEST(Validate, RuleBasedAcceptsEverythingAtStrictBounds) {
  const auto out = accept_all_strict(mine_all(financial()));
  for (const auto& c : out) {
    if (const auto* r = std::get_if<RangeConstraint>(&c.body))
      EXPECT_EQ(c.status == Status::Accepted, r->variant == RangeVariant::Strict);
    else
      EXPECT_EQ(c.status, Status::Accepted);
  }
}

class RemoteFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++requests_;
      last_body_ = req.body;
      auth_ = req.get_header_value("Authorization");
      if (fail_first_ && n == 1) {
        res.status = 503;
        return;
      }
      const json body = json::parse(req.body);
      const std::string prompt = body["messages"].dump();
      std::string content = R"({"verdict": "accept", "rationale": "fine"})";
      if (prompt.find("range:DISTRICT.A11") != std::string::npos)
        content = garbage_first_ && n == 1 ? "no json here" : R"({"verdict": "repair", "bounds": {"min": 8000, "max": null}})";
      res.set_content(json({{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    setenv("SQLBOUND_TEST_KEY", "secret", 1);
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  RemoteConfig config() {
    RemoteConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.api_key_env = "SQLBOUND_TEST_KEY";
    c.retry_delay_ms = 1;
    c.timeout_secs = 5;
    return c;
  }
  ValidationRequest a11_request() {
    const auto db = financial();
    ValidationRequest req;
    for (const auto& c : mine_all(db))
      if (c.identity() == "range:DISTRICT.A11") {
        req.variants.push_back(c);
        if (std::get<RangeConstraint>(c.body).variant == RangeVariant::Strict) req.constraint = c;
      }
    req.profiles.push_back(profile_column(db, "DISTRICT", "A11"));
    return req;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  bool fail_first_ = false;
  bool garbage_first_ = false;
  std::string last_body_;
  std::string auth_;
};

TEST_F(RemoteFixture, SendsJsonModeRequestWithBearerKey) {
  RemoteBackend backend(config());
  std::vector<std::string> warnings;
  const auto d = backend.decide(a11_request(), warnings);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->verdict, Verdict::Repair);
  EXPECT_EQ(*d->min, Rational(8000));
  EXPECT_EQ(auth_, "Bearer secret");
  const json body = json::parse(last_body_);
  EXPECT_EQ(body["response_format"]["type"], "json_object");
  EXPECT_EQ(body["temperature"], 0);
}

TEST_F(RemoteFixture, RetriesServerErrors) {
  fail_first_ = true;
  RemoteBackend backend(config());
  std::vector<std::string> warnings;
  EXPECT_TRUE(backend.decide(a11_request(), warnings));
  EXPECT_EQ(requests_, 2);
  EXPECT_FALSE(warnings.empty());
}

TEST_F(RemoteFixture, AsksAgainAfterUnparsableContent) {
  garbage_first_ = true;
  auto cfg = config();
  const auto audit = std::filesystem::temp_directory_path() / "sqlbound_audit_test.jsonl";
  std::filesystem::remove(audit);
  cfg.audit_path = audit.string();
  RemoteBackend backend(cfg);
  std::vector<std::string> warnings;
  const auto d = backend.decide(a11_request(), warnings);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->verdict, Verdict::Repair);
  EXPECT_EQ(requests_, 2);
  std::ifstream in(audit);
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    EXPECT_EQ(json::parse(line)["identity"], "range:DISTRICT.A11");
    ++lines;
  }
  EXPECT_EQ(lines, 2);
  std::filesystem::remove(audit);
}

TEST_F(RemoteFixture, UnreachableEndpointIsUndecided) {
  auto cfg = config();
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.retries = 1;
  RemoteBackend backend(cfg);
  std::vector<std::string> warnings;
  EXPECT_FALSE(backend.decide(a11_request(), warnings));
  EXPECT_EQ(warnings.size(), 2u);
}
