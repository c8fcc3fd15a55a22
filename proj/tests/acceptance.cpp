// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <netinet/in.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <iostream>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "skillchair/error.hpp"
#include "skillchair/evaluator.hpp"
#include "skillchair/features.hpp"
#include "skillchair/forest.hpp"
#include "skillchair/gateway.hpp"
#include "skillchair/log_io.hpp"
#include "skillchair/logistic.hpp"
#include "skillchair/model.hpp"
#include "skillchair/pipeline.hpp"
#include "skillchair/replay.hpp"
#include "skillchair/rng.hpp"
#include "skillchair/session_store.hpp"
#include "skillchair/simulator.hpp"
#include "skillchair/svm.hpp"
#include "test_util.hpp"

using namespace skillchair;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and thresholds.
constexpr int kAucSets = 1000;
constexpr std::size_t kAucMaxSize = 200;
constexpr double kAucSeconds = 10.0;
constexpr int kGradInstances = 50;
constexpr double kGradStep = 1e-6;
constexpr double kGradRelErr = 1e-5;
constexpr double kSvmGamma = 100.0;
constexpr double kSvmMarginSlack = 1e-3;
constexpr double kSvmMonotoneSlack = 1e-9;
constexpr int kForestDepth = 4;
constexpr int kFeatureWindows = 1000;
constexpr std::size_t kGaussianN = 100000;
constexpr double kGaussianRate = 0.0027;
constexpr double kGaussianTol = 0.001;
constexpr double kMinAuc = 0.80;
constexpr double kNullLow = 0.35;
constexpr double kNullHigh = 0.65;
constexpr double kExperimentSeconds = 300.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Outcome auc_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < kAucSets; ++trial) {
    const auto n = 2 + rng.below(kAucMaxSize - 1);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng.below(6)) : rng.normal();
      y[i] = static_cast<int>(rng.below(2));
    }
    const auto neg = rng.below(n);
    y[neg] = 0;
    y[(neg + 1 + rng.below(n - 1)) % n] = 1;
    if (roc_auc(s, y) != oracle::brute_auc(s, y)) ++mismatches;
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < kAucSeconds,
          std::to_string(kAucSets) + " sets, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 3) + " s"};
}

Outcome logistic_gradient() {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < kGradInstances; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(29));
    const int d = 13;
    Eigen::MatrixXd X(n, d);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
      y.push_back(static_cast<int>(rng.below(2)));
    }
    Eigen::VectorXd theta(d + 1);
    for (int j = 0; j <= d; ++j) theta(j) = rng.normal(0.0, 0.5);
    const double l2 = rng.uniform(0.0, 0.1);
    const auto g = logreg_gradient(X, y, theta, l2);
    for (int j = 0; j <= d; ++j) {
      Eigen::VectorXd up = theta, down = theta;
      up(j) += kGradStep;
      down(j) -= kGradStep;
      const double fd =
          (oracle::naive_loglik(X, y, up, l2) - oracle::naive_loglik(X, y, down, l2)) / (2.0 * kGradStep);
      const double scale = std::max({std::abs(fd), std::abs(g(j)), 1e-3});
      worst = std::max(worst, std::abs(fd - g(j)) / scale);
    }
  }
  return {worst < kGradRelErr, std::to_string(kGradInstances) + " instances, max relative error " + fmt(worst, 3)};
}

Outcome svm_constraints() {
  // positives at x0 >= 1, negatives at x0 <= -1: margin 2 along the first axis
  Rng rng(303);
  const int n = 40;
  Eigen::MatrixXd X(n, 2);
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    X(i, 0) = pos ? 1.0 + rng.uniform(0, 3) : -1.0 - rng.uniform(0, 3);
    X(i, 1) = rng.uniform(-2, 2);
    y.push_back(pos ? 1 : 0);
  }
  X.row(0) << 1.0, -2.0;
  X.row(1) << -1.0, -2.0;
  X.row(2) << 1.0, 2.0;
  X.row(3) << -1.0, 2.0;
  SvmOptions opts;
  opts.gamma = kSvmGamma;
  opts.epochs = 20000;
  opts.record_trace = true;
  const auto m = train_svm(X, y, opts);
  double min_margin = 1e300;
  for (int i = 0; i < n; ++i) {
    const double yi = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    min_margin = std::min(min_margin, yi * m.score(X.row(i).transpose()));
  }
  double worst_rise = 0.0;
  for (std::size_t t = 1; t < m.trace.size(); ++t) {
    worst_rise = std::max(worst_rise, m.trace[t] - m.trace[t - 1]);
  }
  const double recomputed = svm_objective(X, y, m.w, m.b, kSvmGamma);
  const bool ok = min_margin >= 1.0 - kSvmMarginSlack && worst_rise <= kSvmMonotoneSlack &&
                  std::abs(recomputed - m.objective) <= 1e-8;
  return {ok, "min margin " + fmt(min_margin, 6) + ", max objective rise " + fmt(worst_rise, 3) + ", objective " +
                  fmt(m.objective, 6) + " over " + std::to_string(m.trace.size() - 1) + " epochs"};
}

Outcome forest_structure() {
  Rng rng(404);
  Eigen::MatrixXd data(300, 13);
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = rng.normal();
    labels.push_back(data(i, 0) + 0.5 * data(i, 3) * data(i, 7) + rng.normal(0.0, 0.5) > 0 ? 1 : 0);
  }
  ForestOptions opts;
  opts.seed = 404;
  const auto forest = train_forest(data, labels, opts);
  int deepest = 0;
  for (const auto& t : forest.trees) deepest = std::max(deepest, t.depth());

  Eigen::MatrixXd X(6, 2);
  X << 1.0, 5.0,
       2.0, 3.0,
       3.0, 8.0,
       4.0, 1.0,
       5.0, 7.0,
       6.0, 2.0;
  std::vector<int> y{0, 0, 1, 1, 1, 0};
  std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  std::vector<int> irows{0, 1, 2, 3, 4, 5};
  ForestOptions single;
  single.max_depth = kForestDepth;
  single.max_features = 2;
  const auto tree = fit_tree(X, y, rows, single, 0);
  const bool matches = oracle::same_tree(tree, 0, *oracle::reference_tree(X, y, irows, 0, kForestDepth));
  return {deepest <= kForestDepth && matches,
          std::to_string(forest.trees.size()) + " trees, deepest " + std::to_string(deepest) +
              ", 6-row CART oracle " + (matches ? "matches" : "differs")};
}

Outcome feature_oracles() {
  Rng rng(505);
  int mismatches = 0;
  for (int trial = 0; trial < kFeatureWindows; ++trial) {
    const auto n = trial % 100 == 0 ? 18000 : 2 + rng.below(3000);
    std::vector<double> v(n);
    const double base = rng.uniform(-2, 2);
    const double sd = std::pow(10.0, rng.uniform(-4, 1));
    for (auto& x : v) {
      x = rng.normal(base, sd);
      if (rng.uniform() < 0.02) x += rng.normal(0.0, 20.0 * sd);
      if (rng.uniform() < 0.05) x = std::round(x * 100.0) / 100.0;
    }
    const double thr = rng.uniform(-2, 2);
    if (active_portion(v) != oracle::Naive::active(v)) ++mismatches;
    if (quiescent_dispersion(v) != oracle::Naive::quiet(v)) ++mismatches;
    if (lean_back_portion(v, thr) != oracle::Naive::lean(v, thr)) ++mismatches;
  }
  std::vector<double> g(kGaussianN);
  for (auto& x : g) x = rng.normal();
  const double rate = active_portion(g);
  return {mismatches == 0 && std::abs(rate - kGaussianRate) <= kGaussianTol,
          std::to_string(kFeatureWindows) + " windows, " + std::to_string(mismatches) +
              " mismatches, Gaussian active rate " + fmt(rate)};
}

struct Experiment {
  std::vector<PlayerLog> logs;
  Dataset data;
  EvalReport report;
  EvalReport null_report;
  double seconds = 0.0;
};

const ModelReport* find_model(const EvalReport& r, std::string_view name) {
  for (const auto& m : r.models) {
    if (model_key(m.kind) == name) return &m;
  }
  return nullptr;
}

Outcome end_to_end(Experiment& e) {
  const auto start = Clock::now();
  e.logs = generate_population(PopulationSpec{});
  e.data = build_dataset(e.logs);
  const auto specs = ExperimentConfig::default_model_specs();
  auto settings = ExperimentConfig::default_evaluation();
  e.report = evaluate(e.data, specs, settings);
  settings.permute_labels = true;
  e.null_report = evaluate(e.data, specs, settings);
  e.seconds = seconds_since(start);

  bool ok = e.seconds < kExperimentSeconds;
  std::string detail = std::to_string(e.logs.size()) + " players, " + std::to_string(e.data.rows()) + " windows;";
  for (const auto& m : e.report.models) {
    detail += " " + std::string(model_key(m.kind)) + " " + fmt(m.auc_mean, 3);
  }
  for (auto name : {"lr", "svm"}) {
    const auto* m = find_model(e.report, name);
    ok = ok && m && m->auc_mean >= kMinAuc;
  }
  detail += "; null";
  for (const auto& m : e.null_report.models) {
    ok = ok && m.auc_mean >= kNullLow && m.auc_mean <= kNullHigh;
    detail += " " + std::string(model_key(m.kind)) + " " + fmt(m.auc_mean, 3);
  }
  detail += "; " + fmt(e.seconds, 3) + " s";
  return {ok, detail};
}

Outcome importance_signs(const Experiment& e) {
  if (!e.report.importance) return {false, "no importance in report"};
  double axn = NAN, gyo = NAN;
  for (const auto& v : *e.report.importance) {
    if (v.name == "axn") axn = v.value;
    if (v.name == "gyo") gyo = v.value;
  }
  return {axn < 0.0 && gyo > 0.0, "axn " + fmt(axn) + ", gyo " + fmt(gyo)};
}

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

pid_t spawn_server(const fs::path& store, int port, const fs::path& log_file) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    const std::string port_s = std::to_string(port);
    const std::string store_s = store.string();
    if (std::freopen(log_file.c_str(), "a", stdout) == nullptr || ::dup2(::fileno(stdout), 2) < 0) {
      std::_Exit(126);
    }
    ::execl(SKILLCHAIR_CLI_PATH, SKILLCHAIR_CLI_PATH, "serve", "--port", port_s.c_str(), "--store", store_s.c_str(),
            static_cast<char*>(nullptr));
    std::_Exit(127);
  }
  return pid;
}

bool wait_healthy(const std::string& url) {
  for (int i = 0; i < 200; ++i) {
    if (gateway_healthy(url, 200)) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  return false;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Kills the gateway process mid-replay, restarts it on the same store and
// checks that exactly a prefix of whole batches survived, then finishes.
std::string kill_restart(const PlayerLog& log, const fs::path& dir, bool& ok) {
  const fs::path store = dir / "killed";
  const int port = free_port();
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  pid_t pid = spawn_server(store, port, dir / "serve.log");
  if (!wait_healthy(url)) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    ok = false;
    return "gateway process did not start";
  }
  ReplayOptions opts;
  opts.gateway = url;
  opts.session_id = "k1";
  opts.max_retries = 1;
  opts.retry_backoff_ms = 1;
  opts.timeout_ms = 1000;
  // paced so the kill lands part way through the log
  opts.speed = 200.0;
  std::atomic<bool> stopped{false};
  std::thread client([&] {
    try {
      replay(log, opts);
    } catch (const Error&) {
      stopped = true;
    }
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
  client.join();

  const auto batches = partition_batches(log);
  std::size_t persisted = 0;
  std::string on_disk;
  {
    SessionStore reopened(store);
    const auto info = reopened.info(log.player_id, "k1");
    if (info) persisted = info->batch_count;
    on_disk = read_file(store / log.player_id / "k1" / "samples.jsonl");
  }
  std::string expected;
  for (std::size_t k = 0; k < persisted && k < batches.size(); ++k) {
    for (const auto& s : batches[k].samples) {
      append_sample_line(expected, s);
      expected += '\n';
    }
  }
  const bool whole = stopped && persisted > 0 && persisted < batches.size() && on_disk == expected;

  pid = spawn_server(store, port, dir / "serve.log");
  bool resumed = false;
  if (wait_healthy(url)) {
    opts.max_retries = 5;
    try {
      replay(log, opts);
      SessionStore final_store(store);
      resumed = final_store.load_log(log.player_id, "k1") == log;
    } catch (const Error&) {
    }
  }
  ::kill(pid, SIGTERM);
  ::waitpid(pid, nullptr, 0);
  ok = whole && resumed;
  return "killed after " + std::to_string(persisted) + " of " + std::to_string(batches.size()) +
         " batches, store holds exactly those: " + (on_disk == expected ? "yes" : "no") +
         ", resumed run complete: " + (resumed ? "yes" : "no");
}

Outcome ingestion_round_trip(const Experiment& e) {
  testutil::TempDir dir("acceptance");
  write_log_directory(e.logs, dir / "logs");
  const Dataset direct = build_dataset(read_log_directory(dir / "logs"));

  GatewayOptions gopts;
  gopts.port = 0;
  gopts.store_root = dir / "store";
  GatewayServer server(gopts);
  const int port = server.start();
  ReplayOptions ropts;
  ropts.gateway = "http://127.0.0.1:" + std::to_string(port);
  const auto start = Clock::now();
  std::size_t posts = 0;
  for (const auto& log : e.logs) posts += replay(log, ropts).batches_sent;
  const double secs = seconds_since(start);
  const Dataset via_gateway = build_dataset(server.store().load_sealed_logs());
  const bool identical =
      via_gateway == direct && via_gateway.features.size() == direct.features.size() &&
      std::memcmp(via_gateway.features.data(), direct.features.data(),
                  sizeof(double) * static_cast<std::size_t>(direct.features.size())) == 0;

  // Duplicate delivery: every fifth batch loses its ack once, then the
  // whole log is sent a second time before the session is closed.
  const auto& victim = e.logs.front();
  std::mutex mutex;
  std::set<std::uint64_t> dropped;
  server.set_fault_injector([&](const std::string&, const std::string& session, std::uint64_t seq) {
    std::lock_guard lock(mutex);
    return session == "dup" && seq % 5 == 0 && dropped.insert(seq).second;
  });
  ReplayOptions dup = ropts;
  dup.session_id = "dup";
  dup.close = false;
  const auto first = replay(victim, dup);
  dup.close = true;
  replay(victim, dup);
  server.set_fault_injector(nullptr);
  const auto reloaded = server.store().load_log(victim.player_id, "dup");
  const bool no_duplicates = reloaded == victim;
  server.stop();

  bool restart_ok = false;
  const std::string restart = kill_restart(e.logs.back(), dir.path(), restart_ok);

  return {identical && no_duplicates && first.retries > 0 && restart_ok,
          std::to_string(posts) + " batches in " + fmt(secs, 3) + " s, dataset bit-identical: " +
              (identical ? "yes" : "no") + "; " + std::to_string(first.retries) +
              " retried batches and a full resend, duplicates: " + (no_duplicates ? "none" : "found") + "; " +
              restart};
}

Outcome determinism() {
  testutil::TempDir dir("determinism");
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / ("run" + std::to_string(i));
    const std::string cmd = std::string(SKILLCHAIR_CLI_PATH) + " run --seed 7 --out " + out.string() + " > " +
                            (dir / "run.log").string() + " 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "run exited non-zero, see " + cmd};
    reports[i] = read_file(out / "report.json");
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, "report.json " + std::to_string(reports[0].size()) + " bytes, " + (same ? "identical" : "differs")};
}

}  // namespace

int main() {
  int failures = 0;
  auto criterion = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail << std::endl;
  };

  Experiment e;
  criterion(1, "auc-oracle", auc_oracle);
  criterion(2, "lr-gradient", logistic_gradient);
  criterion(3, "svm-constraints", svm_constraints);
  criterion(4, "forest-structure", forest_structure);
  criterion(5, "feature-oracles", feature_oracles);
  criterion(6, "end-to-end", [&] { return end_to_end(e); });
  criterion(7, "importance-signs", [&] { return importance_signs(e); });
  criterion(8, "ingestion-round-trip", [&] {
    return e.logs.empty() ? Outcome{false, "no logs"} : ingestion_round_trip(e);
  });
  criterion(9, "determinism", determinism);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << 9 - failures << "/9" << std::endl;
  return failures ? 1 : 0;
}
