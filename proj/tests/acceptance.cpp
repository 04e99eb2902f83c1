// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [OUT_DIR]     training runs for criteria 6-10 go under OUT_DIR
//                            (default ./acceptance_runs); R3L_WORKERS bounds
//                            the number of concurrent runs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "plain_ucbh.hpp"
#include "r3l/agent.hpp"
#include "r3l/envs.hpp"
#include "r3l/harness/config.hpp"
#include "r3l/harness/sweep.hpp"
#include "r3l/harness/train.hpp"
#include "r3l/nn.hpp"
#include "r3l/raeb.hpp"
#include "r3l/tabular.hpp"

namespace fs = std::filesystem;
using namespace r3l;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string num(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

// ---------------------------------------------------------------------------

Verdict environment_exactness() {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const std::vector<double> one{1.0}, pair{0.6, 0.8};
  check(electricity_cost(one) == 0.1, "cost([1])");
  check(electricity_cost(pair) == 0.1 * (0.6 * 0.6 + 0.8 * 0.8), "cost([0.6,0.8])");

  RandomStream rng = seeded_rng(0);
  EnvConfig c;
  c.variant = Variant::Electric;
  check(MountainCar(c).reset(rng).resources == ResourceVector{12.0}, "electric reset");
  c.variant = Variant::Delivery;
  check(MountainCar(c).reset(rng).resources == ResourceVector{10.0}, "delivery reset");
  c.variant = Variant::ElectricDelivery;
  check(MountainCar(c).reset(rng).resources == (ResourceVector{12.0, 10.0}), "electric-delivery reset");

  c.variant = Variant::Delivery;
  const std::vector<double> unload{0.0, 1.0};
  check(MountainCar(c).project_action(R3LState{{0, 0}, {0.5}}, unload)[1] == 0.5, "projection I=0.5, a_u=1");

  // Goal rewards from a state already past the goal.
  c.physics.start_low = c.physics.start_high = 0.5;
  {
    MountainCar env(c);
    env.reset(rng);
    check(env.step(std::vector<double>{1.0, 1.0}).reward == 100.0 * 1.0, "delivery reward 100*u");
  }
  c.variant = Variant::Electric;
  {
    MountainCar env(c);
    env.reset(rng);
    check(env.step(std::vector<double>{0.0}).reward == 100.0 + 100.0 * 12.0 / 12.0, "electric reward at u=I_max");
    env.reset(rng);
    const auto tr = env.step(std::vector<double>{1.0});
    check(tr.reward == 100.0 + 100.0 * (12.0 - 0.1) / 12.0, "electric reward after one full-throttle step");
  }
  c.variant = Variant::ElectricDelivery;
  {
    MountainCar env(c);
    env.reset(rng);
    check(env.step(std::vector<double>{0.0, 1.0}).reward == 200.0, "electric-delivery reward");
  }
  std::string detail = bad.empty() ? "cost, resets, projection and goal rewards bit-exact" : "mismatch:";
  for (const auto& b : bad) detail += " " + b + ";";
  return {bad.empty(), detail};
}

Verdict gradient_oracle() {
  RandomStream rng = seeded_rng(2024);
  double worst = 0.0;
  const int draws = 200;
  for (int d = 0; d < draws; ++d) {
    const std::size_t in = 1 + rng.index(6), hidden = 1 + rng.index(16), m = 1 + rng.index(3);
    auto p = nn::init_params(in, hidden, 2 * m, rng);
    for (double& b : p.b1()) b = rng.uniform(-0.5, 0.5);
    for (double& b : p.b2()) b = rng.uniform(-0.5, 0.5);
    nn::Batch batch;
    batch.n = 1 + rng.index(8);
    for (std::size_t i = 0; i < batch.n * in; ++i) batch.inputs.push_back(rng.uniform(-2, 2));
    for (std::size_t i = 0; i < batch.n * m; ++i) batch.targets.push_back(rng.normal());
    std::vector<double> grad;
    nn::backward(p, batch, grad);
    const std::size_t k = rng.index(p.data.size());
    const double h = 1e-6, saved = p.data[k];
    p.data[k] = saved + h;
    const double up = nn::batch_nll(p, batch);
    p.data[k] = saved - h;
    const double down = nn::batch_nll(p, batch);
    p.data[k] = saved;
    const double numeric = (up - down) / (2 * h);
    const double rel = std::abs(numeric - grad[k]) / std::max({std::abs(numeric), std::abs(grad[k]), 1e-3});
    worst = std::max(worst, rel);
  }
  return {worst < 1e-4, std::to_string(draws) + " draws, max relative error " + num(worst, 3) + " (< 1e-4)"};
}

Verdict coefficient_properties() {
  const std::size_t n = 10000;
  RandomStream rng = seeded_rng(77);
  bool monotone = true, bounded = true, unit_at_max = true, recovery = true;
  double worst_recovery = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = 1 + rng.index(3);
    raeb::RaebConfig cfg;
    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
      cfg.i_max.push_back(rng.uniform(0.5, 50));
      cfg.alpha.push_back(rng.uniform(1e-3, 100));
      lo[j] = rng.uniform(0, cfg.i_max[j]);
      hi[j] = rng.uniform(lo[j], cfg.i_max[j]);
    }
    const double glo = raeb::coefficient(lo, cfg), ghi = raeb::coefficient(hi, cfg);
    monotone = monotone && glo <= ghi;
    bounded = bounded && glo > 0.0 && ghi <= 1.0;
    unit_at_max = unit_at_max && std::abs(raeb::coefficient(cfg.i_max, cfg) - 1.0) <= 1e-15;

    raeb::RaebConfig full = cfg;
    for (std::size_t j = 0; j < d; ++j) full.alpha[j] = 1e9 * cfg.i_max[j];
    raeb::RaebConfig plain = full;
    plain.mode = raeb::Mode::SurpriseOnly;
    const ResourceVector r(lo);
    const double ext = rng.uniform(0, 100), b = rng.uniform(0, 50);
    const double gap = std::abs(raeb::shape(ext, r, b, full).total - raeb::shape(ext, r, b, plain).total);
    worst_recovery = std::max(worst_recovery, gap);
    recovery = recovery && gap <= 1e-6;
  }
  const bool ok = monotone && bounded && unit_at_max && recovery;
  return {ok, std::to_string(n) + " samples each: monotone=" + (monotone ? "yes" : "no") +
                  " bounded (0,1]=" + (bounded ? "yes" : "no") + " g(I_max)=1 " + (unit_at_max ? "yes" : "no") +
                  " recovery gap " + num(worst_recovery, 3) + " (<= 1e-6)"};
}

Verdict tabular_reduction_and_optimism() {
  RandomStream gen = seeded_rng(4242);
  int trace_equal = 0;
  for (int mdp = 0; mdp < 100; ++mdp) {
    const std::size_t S = 1 + gen.index(6), A = 1 + gen.index(3), H = 1 + gen.index(4);
    const auto spec = random_gridworld(S, A, H, gen);
    const double c = gen.uniform(0.1, 3.0);
    const double iota = tabular::log_factor(S, A, H, 500, 0.05);
    tabular::TabularLearner L(S, A, H, c, iota);
    testing_support::PlainUcbH P(S, A, H, c, iota);
    RandomStream r1 = seeded_rng(mdp), r2 = seeded_rng(mdp);
    bool same = true;
    for (int k = 0; k < 500 && same; ++k) {
      std::size_t s1 = 0, s2 = 0;
      for (std::size_t h = 0; h < H && same; ++h) {
        const auto a1 = L.greedy(h, s1), a2 = P.act(h, s2);
        const auto o1 = gridworld_step(spec, h, s1, a1, 0.0, r1);
        const auto o2 = gridworld_step(spec, h, s2, a2, 0.0, r2);
        L.update(h, s1, a1, o1.reward, o1.next_state, 1.0);
        P.step(h, s2, a2, o2.reward, o2.next_state);
        same = a1 == a2 && L.q(h, s1, a1) == P.Q[h][s2][a2] && L.v(h, s1) == P.V[h][s2];
        s1 = o1.next_state;
        s2 = o2.next_state;
      }
    }
    trace_equal += same;
  }

  const auto chain = default_chain();
  const auto opt = tabular::value_iteration(chain);
  tabular::LearnerConfig cfg;
  cfg.c = 2.0;
  cfg.p = 0.05;
  int optimistic = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    bool ok = true;
    tabular::run_regret_experiment(chain, cfg, 10000, seed, [&](std::size_t, const tabular::TabularLearner& L) {
      for (std::size_t i = 0; ok && i < L.q_table().size(); ++i) ok = L.q_table()[i] >= opt.q[i];
    });
    optimistic += ok;
  }
  return {trace_equal == 100 && optimistic >= 19, "trace-equal on " + std::to_string(trace_equal) +
                                                      "/100 random MDPs; Q >= Q* throughout on " +
                                                      std::to_string(optimistic) + "/20 seeds (need 19)"};
}

Verdict sqrt_regret() {
  const auto chain = default_chain();
  const std::size_t K = 100000;
  std::vector<std::string> lines;
  bool all = true;
  double worst = 0.0;
  for (double d : {1.0, 2.0, 4.0}) {
    tabular::LearnerConfig cfg;
    cfg.weight = tabular::BonusWeight::constant(d);
    std::string row = "d=" + num(d, 2) + ":";
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto rec = tabular::run_regret_experiment(chain, cfg, K, seed);
      const double e = tabular::regret_growth_exponent(rec, 1000, K);
      worst = std::max(worst, e);
      all = all && e < 0.75;
      row += " " + num(e, 3);
    }
    lines.push_back(row);
  }
  std::string detail = "c=2 exponents over episodes 1e3..1e5 (need < 0.75 each):";
  for (const auto& l : lines) detail += " [" + l + "]";
  detail += " max " + num(worst, 3);

  tabular::LearnerConfig small;
  small.c = 0.005;
  std::string info;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rec = tabular::run_regret_experiment(chain, small, K, seed);
    info += " " + num(tabular::regret_growth_exponent(rec, 1000, K), 3);
  }
  detail += "; info only, c=0.005 d=1:" + info;
  return {all, detail};
}

// ---------------------------------------------------------------------------
// Delivery mountain car runs shared by criteria 6-9.

struct Arm {
  std::string name;
  std::string mode;
  double goods;
};

struct ArmStats {
  std::vector<double> finals;
  std::vector<double> exhaustion;
  double mean_final = 0.0;
  double mean_exhaustion = 0.0;
  int seeds_at_100 = 0;
};

const std::vector<Arm> kArms{{"full", "full", 10},
                             {"surprise_only", "surprise_only", 10},
                             {"coefficient_only", "coefficient_only", 10},
                             {"surprise_only_goods2", "surprise_only", 2},
                             {"surprise_only_goods50", "surprise_only", 50}};
constexpr std::uint64_t kSeeds = 5;

std::map<std::string, ArmStats> run_delivery_arms(const fs::path& out) {
  struct Job {
    std::size_t arm;
    std::uint64_t seed;
    harness::RunResult result;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < kArms.size(); ++a)
    for (std::uint64_t s = 0; s < kSeeds; ++s) jobs.push_back({a, s, {}});
  harness::parallel_for(jobs.size(), harness::worker_count(), [&](std::size_t i) {
    const auto& arm = kArms[jobs[i].arm];
    harness::KeyValues kv;
    kv.set("env.variant", "delivery");
    kv.set("env.initial_goods", num(arm.goods, 17));
    kv.set("raeb.mode", arm.mode);
    const auto rc = harness::run_config_from(kv);
    jobs[i].result = harness::train(rc, jobs[i].seed, out / arm.name / ("seed" + std::to_string(jobs[i].seed)));
  });
  std::map<std::string, ArmStats> stats;
  for (const auto& j : jobs) {
    auto& st = stats[kArms[j.arm].name];
    st.finals.push_back(j.result.final_eval_return());
    st.exhaustion.push_back(j.result.mean_steps_to_exhaustion());
    st.seeds_at_100 += j.result.final_eval_return() >= 100.0;
  }
  for (auto& [name, st] : stats) {
    for (double f : st.finals) st.mean_final += f / double(st.finals.size());
    for (double e : st.exhaustion) st.mean_exhaustion += e / double(st.exhaustion.size());
  }
  return stats;
}

std::string finals_of(const ArmStats& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.finals.size(); ++i) out += (i ? " " : "") + num(s.finals[i]);
  return out + "]";
}

Verdict determinism(const fs::path& out) {
  harness::KeyValues kv;
  kv.set("env.variant", "delivery");
  kv.set("run.total_steps", "20000");
  kv.set("run.eval_interval", "5000");
  kv.set("run.log_steps", "true");
  const auto rc = harness::run_config_from(kv);
  const auto a = out / "determinism" / "a", b = out / "determinism" / "b";
  harness::train(rc, 11, a);
  harness::train(rc, 11, b);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::vector<std::string> differ;
  for (const char* f : {"metrics.csv", "eval.csv", "steps.csv", "unloads.csv", "qtable.txt", "model.txt"}) {
    const auto x = slurp(a / f);
    if (x.empty() || x != slurp(b / f)) differ.push_back(f);
  }
  std::string detail = differ.empty() ? "two 2e4-step runs, seed 11: metrics, eval, steps, unloads and checkpoints "
                                        "byte-identical"
                                      : "differ:";
  for (const auto& d : differ) detail += " " + d;
  return {differ.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");

  report(1, "environment exactness", environment_exactness);
  report(2, "gradient oracle", gradient_oracle);
  report(3, "coefficient properties", coefficient_properties);
  report(4, "tabular reduction and optimism", tabular_reduction_and_optimism);
  report(5, "sqrt-T regret exponent", sqrt_regret);

  std::map<std::string, ArmStats> arms;
  std::string arm_error;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      arms = run_delivery_arms(out);
    } catch (const std::exception& e) {
      arm_error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("info: %zu delivery runs (5 arms x 5 seeds x 2e5 steps) finished in %.0f s under %s\n",
                kArms.size() * kSeeds, secs, out.string().c_str());
    for (const auto& [name, st] : arms) {
      std::printf("info: %-22s final eval %s mean %s; steps to exhaustion mean %s\n", name.c_str(),
                  finals_of(st).c_str(), num(st.mean_final).c_str(), num(st.mean_exhaustion).c_str());
    }
  }
  auto need_arms = [&](const std::function<Verdict()>& f) {
    return [&, f]() -> Verdict {
      if (!arm_error.empty()) return {false, "training runs failed: " + arm_error};
      return f();
    };
  };

  report(6, "full beats surprise-only on delivery", need_arms([&] {
           const auto& full = arms["full"];
           const auto& so = arms["surprise_only"];
           const bool ok = full.mean_final > so.mean_final && full.seeds_at_100 >= 4 && so.seeds_at_100 <= 2;
           return Verdict{ok, "mean final eval full " + num(full.mean_final) + " vs surprise_only " +
                                  num(so.mean_final) + "; seeds with eval >= 100: full " +
                                  std::to_string(full.seeds_at_100) + "/5 (need 4), surprise_only " +
                                  std::to_string(so.seeds_at_100) + "/5 (need <= 2)"};
         }));
  report(7, "steps-to-exhaustion ratio", need_arms([&] {
           const auto& full = arms["full"];
           const auto& so = arms["surprise_only"];
           const double ratio = full.mean_exhaustion / so.mean_exhaustion;
           return Verdict{ratio >= 2.0, "full " + num(full.mean_exhaustion) + " / surprise_only " +
                                            num(so.mean_exhaustion) + " = " + num(ratio, 3) + " (need >= 2)"};
         }));
  report(8, "component ablation", need_arms([&] {
           const double f = arms["full"].mean_final, c = arms["coefficient_only"].mean_final,
                        s = arms["surprise_only"].mean_final;
           return Verdict{f > c && f > s, "mean final eval full " + num(f) + " vs coefficient_only " + num(c) +
                                              " and surprise_only " + num(s) + " (need strictly greater than both)"};
         }));
  report(9, "initial-goods monotonicity", need_arms([&] {
           const double g2 = arms["surprise_only_goods2"].mean_final, g10 = arms["surprise_only"].mean_final,
                        g50 = arms["surprise_only_goods50"].mean_final;
           std::string detail = "surprise_only mean final eval at goods 2/10/50: " + num(g2) + " / " + num(g10) +
                                " / " + num(g50);
           if (g2 == g10 && g10 == g50) detail += " (holds only through ties: all three means are equal)";
           return Verdict{g2 <= g10 && g10 <= g50, detail};
         }));
  report(10, "determinism", [&] { return determinism(out); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
