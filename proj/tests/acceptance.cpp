// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Thresholds are fixed here.

#include <Eigen/Dense>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cbkb/evaluation.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/service.hpp"
#include "cbkb/store.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"
#include "worlds.hpp"

using namespace cbkb;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kScenarioSeconds = 1.0;
constexpr double kSoundnessSeconds = 300.0;
constexpr std::size_t kSoundnessMinPairs = 200;
constexpr std::uint32_t kModelBirds = 3;
constexpr std::uint32_t kModelFlights = 3;
constexpr std::size_t kProjectionGraphs = 30;
constexpr std::size_t kProjectionMaxNodes = 6;
constexpr double kMinCubicR2 = 0.99;
constexpr int kFuzzCommands = 1000;
constexpr double kFuzzSeconds = 120.0;
constexpr double kFixpointAgreement = 1e-9;
constexpr int kFilterLadders = 100;

struct Result {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const std::string& name) {
  std::ifstream in(std::string(CBKB_TEST_DATA) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing test data " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed_stamp() { return "2024-01-01T00:00:00Z"; }

std::string outcome_line(const std::string& file, const ScriptResult& r) {
  const nlohmann::json& b = r.response.body;
  std::string what = b.contains("summary") ? b["summary"].get<std::string>()
                                           : b.value("error", "?") + " " + b.value("message", "");
  return file + ":" + std::to_string(r.line) + " " + r.agent + " " + what;
}

Result scenario_replay() {
  auto start = Clock::now();
  std::vector<std::string> lines;
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  Service correction(Service::Options{std::nullopt, fixed_stamp});
  auto a = run_script(correction, read_file("scenario_correction.kb"), "pm");
  for (const ScriptResult& r : a) lines.push_back(outcome_line("scenario_correction.kb", r));
  Service cloning(Service::Options{std::nullopt, fixed_stamp});
  auto d = run_script(cloning, read_file("scenario_cloning.kb"), "pm");
  for (const ScriptResult& r : d) lines.push_back(outcome_line("scenario_cloning.kb", r));

  // (a) instantiation accepted without a link
  expect(a.size() == 9, "correction scenario has 9 commands");
  if (a.size() == 9) {
    expect(a[6].response.status == 200 && a[6].response.body["created"][0] == "u2#s1",
           "Tweety statement accepted");
    // (b) bare generalization rejected, naming u1's statement
    const auto& b = a[7].response.body;
    expect(a[7].response.status == 409 && b.value("reason", "") == "implicit-conflict" &&
               b["conflicts"].size() == 1 && b["conflicts"][0]["id"] == "u1#s1" &&
               b["conflicts"][0]["kind"] == "generalization",
           "75% statement rejected with generalization conflict on u1#s1");
    // (c) corrective wrapper accepted
    expect(a[8].response.status == 200, "corrective wrapper accepted");
  }
  // (d) cloning
  auto kb = cloning.state();
  expect(d.size() == 6 && d[5].response.body.value("status", "") == "accepted-with-cloning",
         "definition triggers cloning");
  std::vector<std::string> clones;
  for (const auto& [clone, origin] : kb->clone_of) {
    if (origin == "wn#bird") clones.push_back(clone);
  }
  expect(clones == std::vector<std::string>{"u1#bird", "u2#bird"}, "clones are u1#bird and u2#bird");
  auto fe = [&](const std::string& id) {
    const Statement* s = kb->statement(id);
    return s ? render_fe(*s) : std::string();
  };
  expect(fe("u1#s1") == "u1#`any u1#bird can be agent of a flight´", "u1 statement rewritten");
  expect(fe("u2#s1") == "u2#`75% of u2#bird can be agent of a flight´", "u2 statement rewritten");
  expect(snapshot_hash(replay(cloning.journal_entries())) == snapshot_hash(*kb),
         "cloning journal replays to the live state");

  std::vector<std::string> golden;
  std::istringstream g(read_file("scenario_outcomes.golden"));
  for (std::string line; std::getline(g, line);) golden.push_back(line);
  if (golden != lines) {
    std::string diff = "outcome sequence differs from golden:";
    for (std::size_t i = 0; i < std::max(golden.size(), lines.size()); ++i) {
      std::string want = i < golden.size() ? golden[i] : "<none>";
      std::string got = i < lines.size() ? lines[i] : "<none>";
      if (want != got) diff += "\n    want " + want + "\n    got  " + got;
    }
    failures.push_back(diff);
  }

  double elapsed = seconds_since(start);
  expect(elapsed < kScenarioSeconds, "runtime under 1 s");
  std::ostringstream out;
  out << lines.size() << " outcomes, " << elapsed << " s";
  for (const std::string& f : failures) out << "\n  " << f;
  return {failures.empty(), out.str()};
}

Result kif_strings() {
  struct Case {
    const char* sentence;
    const char* expected;
  };
  const Case cases[] = {
      {"u1#`any u1#bird is pm#agent of a pm#flight´",
       "(creator u1 '(defrelation u1#bird (?b) :=> (exists ((?f pm#flight)) (pm#agent ?b ?f))))"},
      {"u1#`every u1#bird is agent of a flight´",
       "(believer u1 '(forall ((?b u1#bird)) (exists ((?f flight)) (agent ?b ?f))))"},
      // The reference string has one more opening than closing parenthesis;
      // the renderer emits balanced KIF.
      {"u1#`every bird can be agent of a flight´",
       "(believer u1 '(modality possible '(forall ((?b bird)) (exists ((?f flight)) (agent ?b ?f))))"},
  };
  std::ostringstream out;
  int matched = 0;
  for (const Case& c : cases) {
    std::string got = render_kif(parse_sentence(c.sentence));
    if (got == c.expected) {
      ++matched;
      continue;
    }
    out << "\n  mismatch for " << c.sentence << "\n    want " << c.expected << "\n    got  " << got;
  }
  return {matched == 3, std::to_string(matched) + "/3 byte-identical" + out.str()};
}

Result matcher_soundness() {
  auto start = Clock::now();
  oracle::SoundnessReport r = oracle::matcher_soundness(kModelBirds, kModelFlights);
  double elapsed = seconds_since(start);
  std::ostringstream out;
  out << r.pairs << " pairs, " << r.specializes << " specializes, " << r.models << " models, "
      << r.violations << " violations, " << elapsed << " s";
  for (const auto& [x, y] : r.examples) out << "\n  " << x << " does not entail " << y;
  return {r.pairs >= kSoundnessMinPairs && r.specializes > 0 && r.violations == 0 &&
              elapsed < kSoundnessSeconds,
          out.str()};
}

Result projection_oracle() {
  oracle::Taxonomy tax = oracle::animal_taxonomy();
  std::mt19937 rng(2024);
  std::vector<Graph> graphs;
  while (graphs.size() < kProjectionGraphs) {
    Graph g = oracle::random_graph(rng, kProjectionMaxNodes);
    graphs.push_back(g);
    if (graphs.size() < kProjectionGraphs) graphs.push_back(oracle::specialize(g, rng));
  }
  std::size_t pairs = 0, found = 0, disagreements = 0;
  for (const Graph& x : graphs) {
    for (const Graph& y : graphs) {
      ++pairs;
      bool expected = oracle::brute_force_project(x, y, tax);
      bool got = project_graph(x, y, tax.hierarchy).has_value();
      found += expected;
      disagreements += expected != got;
    }
  }
  return {disagreements == 0, std::to_string(pairs) + " pairs, " + std::to_string(found) +
                                  " projections, " + std::to_string(disagreements) +
                                  " disagreements"};
}

Graph chain(std::size_t n, const std::string& term) {
  Graph g;
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back(ConceptNode{term, Quantifier::at_least(1), std::nullopt, std::nullopt});
    if (i > 0) g.edges.push_back(Edge{i - 1, "part", i});
  }
  return g;
}

Result chain_scaling() {
  oracle::Taxonomy tax = oracle::animal_taxonomy();
  std::vector<double> ns, ts;
  for (std::size_t n = 10; n <= 1000; n += n < 100 ? 10 : 90) {
    Graph query = chain(n, "t#animal");
    Graph target = chain(n, "t#penguin");
    std::vector<double> samples;
    for (int rep = 0; rep < 5; ++rep) {
      auto start = Clock::now();
      bool ok = project_graph(query, target, tax.hierarchy).has_value();
      samples.push_back(seconds_since(start));
      if (!ok) return {false, "chain of " + std::to_string(n) + " did not project"};
    }
    std::sort(samples.begin(), samples.end());
    ns.push_back(static_cast<double>(n));
    ts.push_back(samples[samples.size() / 2]);
  }
  Eigen::MatrixXd a(ns.size(), 4);
  Eigen::VectorXd b(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double x = ns[i] / 1000.0;
    a.row(static_cast<Eigen::Index>(i)) << 1.0, x, x * x, x * x * x;
    b(static_cast<Eigen::Index>(i)) = ts[i];
  }
  Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  Eigen::VectorXd residual = b - a * coef;
  double mean = b.mean();
  double ss_tot = (b.array() - mean).square().sum();
  double r2 = ss_tot == 0 ? 1.0 : 1.0 - residual.squaredNorm() / ss_tot;
  std::ostringstream out;
  out << ns.size() << " sizes 10..1000, t(1000) = " << ts.back() << " s, cubic R^2 = " << r2;
  return {r2 >= kMinCubicR2, out.str()};
}

Result protocol_fuzz() {
  auto start = Clock::now();
  Service live(Service::Options{std::nullopt, fixed_stamp});
  for (const ScriptResult& r : run_script(live, fuzz::setup_script(), "pm")) {
    if (r.response.status >= 400) return {false, "setup failed at " + r.command};
  }
  fuzz::Generator gen(7);
  std::size_t accepted = 0, rejected = 0, queries = 0;
  std::map<std::string, std::size_t> violations;
  std::vector<std::string> examples;
  for (int i = 0; i < kFuzzCommands; ++i) {
    std::shared_ptr<const KnowledgeBase> before = live.state();
    std::string hash_before = snapshot_hash(*before);
    std::uint64_t journal_before = live.journal_length();
    fuzz::Step step = gen.next(*before);
    Response r = live.command(step.agent, step.text);
    std::shared_ptr<const KnowledgeBase> after = live.state();
    bool journaled = live.journal_length() == journal_before + 1;
    if (r.status >= 400 || !journaled) {
      bool query = r.status < 400;
      (query ? queries : rejected)++;
      if (snapshot_hash(*after) != hash_before || live.journal_length() != journal_before) {
        ++violations["rejection-purity"];
        if (examples.size() < 5) examples.push_back("rejection-purity: " + step.text);
      }
      continue;
    }
    ++accepted;
    for (const fuzz::Violation& v : fuzz::check_accepted(*before, *after, step.agent)) {
      ++violations[v.invariant];
      if (examples.size() < 5) examples.push_back(v.invariant + ": " + step.agent + " " + step.text + " (" + v.detail + ")");
    }
  }
  bool replay_ok = snapshot_hash(replay(live.journal_entries())) == snapshot_hash(*live.state());
  double elapsed = seconds_since(start);

  std::ostringstream out;
  out << kFuzzCommands << " commands (" << accepted << " accepted, " << rejected << " rejected, "
      << queries << " queries), replay hash " << (replay_ok ? "equal" : "DIFFERENT") << ", "
      << elapsed << " s";
  for (const auto& [name, count] : violations) out << "\n  " << name << ": " << count;
  for (const std::string& e : examples) out << "\n  e.g. " << e;
  return {violations.empty() && replay_ok && accepted > 100 && rejected > 50 &&
              elapsed < kFuzzSeconds,
          out.str()};
}

Result evaluation() {
  std::vector<std::string> failures;
  std::mt19937 rng(31);

  test::World single = test::random_world(rng, 1, 1, 0.0);
  test::require_ok(submit_rating(single.kb, "u1", single.statements[0], "acceptance", 0.4,
                                 test::kDate),
                   "rating");
  double mean = eval_object(single.kb, "(mean acceptance)", single.statements[0]);
  if (mean != 0.4) failures.push_back("singleton mean " + std::to_string(mean));

  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    test::World w = test::random_world(rng, 2, 1 + trial % 3, 0.8);
    Evaluator ev(w.kb, kDefaultMeasure);
    auto expected = oracle::fixpoint_oracle(w.oracle, 100);
    for (const std::string& u : {"u1", "u2"}) {
      worst = std::max(worst, std::abs(ev.user_score(u) - expected.at(u)));
    }
  }
  if (worst > kFixpointAgreement) failures.push_back("fixpoint deviation " + std::to_string(worst));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int broken_ladders = 0;
  for (int ladder = 0; ladder < kFilterLadders; ++ladder) {
    test::World w = test::random_world(rng, 2 + ladder % 3, 2, 0.8);
    std::vector<double> thresholds(6);
    for (double& t : thresholds) t = unit(rng);
    std::sort(thresholds.begin(), thresholds.end());
    std::set<std::string> previous = test::visible(w.kb, 0.0, w.statements);
    bool ok = previous.size() == w.statements.size();
    for (double t : thresholds) {
      std::set<std::string> now = test::visible(w.kb, t, w.statements);
      ok = ok && std::includes(previous.begin(), previous.end(), now.begin(), now.end());
      previous = std::move(now);
    }
    broken_ladders += !ok;
  }
  if (broken_ladders) failures.push_back(std::to_string(broken_ladders) + " non-monotone ladders");

  std::ostringstream out;
  out << "singleton mean " << mean << ", max fixpoint deviation " << worst << ", "
      << kFilterLadders - broken_ladders << "/" << kFilterLadders << " monotone ladders";
  for (const std::string& f : failures) out << "\n  " << f;
  return {failures.empty(), out.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"scenario replay", scenario_replay},
      {"KIF bit-exactness", kif_strings},
      {"matcher soundness", matcher_soundness},
      {"projection oracle equivalence", projection_oracle},
      {"acyclic-query scaling", chain_scaling},
      {"protocol fuzzing", protocol_fuzz},
      {"evaluation", evaluation},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << std::endl;
    failed += !r.pass;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
