// Desk-scale acceptance runner. Prints one PASS/FAIL line per criterion and
// exits with 4 when any criterion fails.
//
//   acceptance [--criteria 1,2,3,4,5] [--work DIR] [--seed N] [--jobs N] [--reuse]

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "socnav/cli.hpp"
#include "socnav/config.hpp"
#include "socnav/evaluator.hpp"
#include "socnav/trainer.hpp"
#include "socnav/uncertainty.hpp"
#include "socnav/value_policy.hpp"

using namespace socnav;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    int id;
    bool pass;
    std::string text;
};

void report(std::vector<Verdict>& out, int id, bool pass, const std::string& text) {
    out.push_back({id, pass, text});
    fmt::print("[{}] C{} {}\n", pass ? "PASS" : "FAIL", id, text);
    std::cout.flush();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

struct Context {
    fs::path work;
    fs::path bin_dir;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool reuse = false;
};

// ---------------------------------------------------------------- C1

void criterion1(const Context& ctx, std::vector<Verdict>& out) {
    const auto t0 = Clock::now();
    std::vector<fs::path> binaries;
    for (const auto& e : fs::directory_iterator(ctx.bin_dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > 5 && name.ends_with("_test")) binaries.push_back(e.path());
    }
    std::sort(binaries.begin(), binaries.end());
    std::vector<std::string> failed;
    fs::create_directories(ctx.work / "c1");
    for (const auto& b : binaries) {
        const fs::path log = ctx.work / "c1" / (b.filename().string() + ".log");
        const std::string cmd = fmt::format("\"{}\" > \"{}\" 2>&1", b.string(), log.string());
        if (std::system(cmd.c_str()) != 0) failed.push_back(b.filename().string());
    }
    const double secs = seconds_since(t0);
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
    const bool pass = !binaries.empty() && failed.empty() && secs < 300.0;
    report(out, 1, pass,
           fmt::format("unit/property suite: {} binaries, {} failing{}{}; {:.1f} s (limit 300 s)", binaries.size(),
                       failed.size(), failed.empty() ? "" : " (", failed.empty() ? "" : names + ")", secs));
}

// ---------------------------------------------------------------- C2

const std::vector<int> kBankLengths{1, 5, 10, 20};

struct BankRun {
    std::shared_ptr<const UncertaintyBank> bank;
    std::vector<ModelReport> reports;
    double seconds = 0.0;
};

BankRun build_bank(const Context& ctx) {
    const Config config;
    const auto t0 = Clock::now();
    const UncertaintyDataset data = generate_training_set(uncertainty_data_config(config), ctx.seed);
    BankRun run;
    const UncertaintyBank bank =
        train_uncertainty_models(data, uncertainty_train_config(config), ctx.seed, kBankLengths, &run.reports);
    run.seconds = seconds_since(t0);
    bank.save(ctx.work / "uncertainty_bank", run.reports);
    run.bank = std::make_shared<const UncertaintyBank>(bank);

    std::ostringstream csv;
    csv << "t,n_train,n_validation,best_epoch,validation_mae,residual_mean,residual_std,within_0.25\n";
    for (const auto& r : run.reports)
        fmt::print(csv, "{},{},{},{},{:.6f},{:.6f},{:.6f},{:.4f}\n", r.t, r.n_train, r.n_validation, r.best_epoch,
                   r.validation_mae, r.residual_mean, r.residual_std, r.within_quarter);
    write_text(ctx.work / "uncertainty_report.csv", csv.str());
    return run;
}

std::shared_ptr<const UncertaintyBank> criterion2(const Context& ctx, std::vector<Verdict>& out) {
    const BankRun run = build_bank(ctx);
    bool monotone = true;
    std::string maes;
    for (std::size_t i = 0; i < run.reports.size(); ++i) {
        if (i > 0 && run.reports[i].validation_mae > run.reports[i - 1].validation_mae) monotone = false;
        maes += fmt::format("{}t={}:{:.4f}", i ? " " : "", run.reports[i].t, run.reports[i].validation_mae);
    }
    const double std20 = run.reports.back().residual_std;
    const bool pass = monotone && std20 <= 0.12 && run.seconds <= 1800.0;
    report(out, 2, pass,
           fmt::format("uncertainty models: MAE {} ({}); t=20 residual std {:.4f} (limit 0.12); {:.0f} s (limit 1800 s)",
                       maes, monotone ? "non-increasing" : "NOT non-increasing", std20, run.seconds));
    return run.bank;
}

std::shared_ptr<const UncertaintyBank> load_or_build_bank(const Context& ctx) {
    const fs::path dir = ctx.work / "uncertainty_bank";
    if (fs::exists(dir / "manifest.json")) {
        const UncertaintyBank bank = UncertaintyBank::load(dir);
        if (bank.available() == kBankLengths) return std::make_shared<const UncertaintyBank>(bank);
    }
    return build_bank(ctx).bank;
}

// ---------------------------------------------------------------- C3-C5

struct Trained {
    std::string name;
    fs::path checkpoint;
    double seconds = 0.0;
    bool reused = false;
};

Trained train_variant(const Context& ctx, const std::vector<std::string>& overrides) {
    Config config;
    config.apply_override("train.episodes=4000");
    config.apply_override("crowd.pedestrians=5");
    config.apply_override("train.normalized_discount=true");
    for (const auto& o : overrides) config.apply_override(o);
    TrainerConfig tc = trainer_config(config);
    Trained t;
    t.name = tc.variant.name;
    const fs::path dir = ctx.work / ("train_" + t.name);
    t.checkpoint = dir / "checkpoints" / "final.snck";
    const fs::path timing = dir / "wall_seconds.txt";
    if (ctx.reuse && fs::exists(t.checkpoint) && fs::exists(timing)) {
        t.reused = true;
        t.seconds = std::stod(slurp(timing));
        return t;
    }
    fs::create_directories(dir);
    {
        std::ofstream echo(dir / "config.echo");
        config.write(echo);
    }
    tc.out_dir = dir;
    tc.checkpoint_interval = 1000;
    const auto t0 = Clock::now();
    tc.on_episode = [&](const EpisodeLog& row) {
        if ((row.episode + 1) % 500 == 0)
            fmt::print(std::cerr, "  {} episode {} ({:.0f} s)\n", t.name, row.episode + 1, seconds_since(t0));
    };
    train_value_network(tc, ctx.seed);
    t.seconds = seconds_since(t0);
    write_text(timing, fmt::format("{:.3f}\n", t.seconds));
    return t;
}

PolicyEntry entry_for(const Trained& t, const std::shared_ptr<const UncertaintyBank>& bank) {
    const nn::Checkpoint ckpt = nn::load_checkpoint(t.checkpoint);
    auto net = std::make_shared<const ValueNetwork>(ValueNetwork::from_checkpoint(ckpt));
    const LookaheadConfig look = lookahead_from_checkpoint(ckpt);
    const bool wants_rho = look.feed_rho || look.reward.variant() == RewardVariant::Modified;
    const RhoSource source = wants_rho ? RhoSource::Estimated : RhoSource::None;
    const std::string name = t.name;
    return {name, [=] {
                return std::make_unique<ValueNetworkPolicy>(net, look, source, wants_rho ? bank : nullptr,
                                                            EstimatorConfig{}, name);
            }};
}

BenchmarkReport evaluate_at(const Context& ctx, std::span<const PolicyEntry> entries, double rho_max) {
    Config config;
    config.apply_override("eval.trials=200");
    config.apply_override("eval.scenario=circle");
    config.apply_override("crowd.policy=noisy_orca");
    config.apply_override(fmt::format("crowd.rho_max={}", rho_max));
    BenchmarkConfig bc = benchmark_config(config);
    bc.jobs = ctx.jobs;
    return run_benchmark(entries, bc, ctx.seed);
}

std::string report_csv(const BenchmarkReport& r) {
    std::ostringstream csv;
    write_report_csv(csv, r);
    return csv.str();
}

double pct(double rate) { return 100.0 * rate; }

void criteria345(const Context& ctx, const std::set<int>& wanted, std::vector<Verdict>& out) {
    const auto bank = load_or_build_bank(ctx);

    const bool need4 = wanted.count(4) > 0;
    const Trained sarl = train_variant(ctx, {"train.variant=sarl"});
    const Trained reward = train_variant(ctx, {"train.variant=reward", "train.stage_length=667"});
    std::vector<Trained> fixed;
    if (need4) {
        fixed.push_back(train_variant(ctx, {"train.variant=sarl", "reward.d_disc_const=0.0"}));
        fixed.push_back(train_variant(ctx, {"train.variant=sarl", "reward.d_disc_const=0.2"}));
    }

    const std::vector<PolicyEntry> c3_entries{entry_for(sarl, bank), entry_for(reward, bank)};
    const auto eval_t0 = Clock::now();
    std::map<double, BenchmarkReport> c3;
    for (double rho : {0.0, 0.5}) {
        c3[rho] = evaluate_at(ctx, c3_entries, rho);
        write_text(ctx.work / "c3" / fmt::format("report_rho{:.2f}.csv", rho), report_csv(c3[rho]));
        std::ostringstream table;
        write_report_table(table, c3[rho]);
        write_text(ctx.work / "c3" / fmt::format("report_rho{:.2f}.txt", rho), table.str());
    }
    const double eval_secs = seconds_since(eval_t0);

    if (wanted.count(3)) {
        const auto& s0 = c3[0.0].summary(sarl.name);
        const auto& r0 = c3[0.0].summary(reward.name);
        const auto& s5 = c3[0.5].summary(sarl.name);
        const auto& r5 = c3[0.5].summary(reward.name);
        const double gap0 = std::abs(pct(r0.success_rate()) - pct(s0.success_rate()));
        const double gain5 = pct(r5.success_rate()) - pct(s5.success_rate());
        const double reduction =
            s5.collision_events > 0 ? 1.0 - static_cast<double>(r5.collision_events) / s5.collision_events : 0.0;
        const double total = sarl.seconds + reward.seconds + eval_secs;
        const bool ok0 = gap0 <= 10.0;
        const bool ok5 = gain5 >= 10.0;
        const bool okc = s5.collision_events > 0 && reduction >= 0.40;
        const bool okt = total <= 4 * 3600.0;
        report(out, 3, ok0 && ok5 && okc && okt,
               fmt::format("ablation: rho 0.0 success sarl {:.1f}% reward {:.1f}% (gap {:.1f} <= 10: {}); rho 0.5 "
                           "success sarl {:.1f}% reward {:.1f}% (gain {:+.1f} >= 10: {}); collisions sarl {} reward {} "
                           "(reduction {:.0f}% >= 40%: {}); {:.0f} s{} (limit 14400 s: {})",
                           pct(s0.success_rate()), pct(r0.success_rate()), gap0, ok0 ? "yes" : "no",
                           pct(s5.success_rate()), pct(r5.success_rate()), gain5, ok5 ? "yes" : "no",
                           s5.collision_events, r5.collision_events, 100.0 * reduction, okc ? "yes" : "no", total,
                           sarl.reused || reward.reused ? " incl. recorded training time" : "", okt ? "yes" : "no"));
    }

    if (need4) {
        std::vector<PolicyEntry> entries;
        for (const auto& f : fixed) entries.push_back(entry_for(f, bank));
        const BenchmarkReport r = evaluate_at(ctx, entries, 0.5);
        write_text(ctx.work / "c4" / "report_rho0.50.csv", report_csv(r));
        const double adaptive = pct(c3[0.5].summary(reward.name).success_rate());
        std::vector<std::pair<std::string, double>> rivals{{sarl.name, pct(c3[0.5].summary(sarl.name).success_rate())}};
        for (const auto& f : fixed) rivals.emplace_back(f.name, pct(r.summary(f.name).success_rate()));
        bool pass = true;
        std::string parts;
        for (const auto& [name, s] : rivals) {
            pass = pass && adaptive >= s - 3.0;
            parts += fmt::format("{}{} {:.1f}%", parts.empty() ? "" : ", ", name, s);
        }
        report(out, 4, pass,
               fmt::format("adaptive discomfort at rho 0.5: {} {:.1f}% vs fixed {} (tolerance -3 points)", reward.name,
                           adaptive, parts));
    }

    if (wanted.count(5)) {
        bool identical = true;
        for (double rho : {0.0, 0.5}) {
            const std::string again = report_csv(evaluate_at(ctx, c3_entries, rho));
            write_text(ctx.work / "c5" / fmt::format("report_rho{:.2f}.csv", rho), again);
            identical = identical && again == slurp(ctx.work / "c3" / fmt::format("report_rho{:.2f}.csv", rho));
        }
        report(out, 5, identical,
               fmt::format("determinism: repeated evaluation reports are {}", identical ? "byte-identical" : "DIFFERENT"));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale acceptance criteria", "acceptance"};
    std::string criteria = "1,2,3,4,5";
    Context ctx;
    std::string work = "acceptance_runs";
    app.add_option("--criteria", criteria, "comma-separated criterion numbers");
    app.add_option("--work", work, "scratch directory for datasets, checkpoints and reports");
    app.add_option("--seed", ctx.seed, "root seed");
    app.add_option("--jobs", ctx.jobs, "evaluation worker threads");
    app.add_flag("--reuse", ctx.reuse, "reuse final checkpoints and recorded training times found in the work directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    ctx.work = fs::absolute(work);
    ctx.bin_dir = fs::absolute(fs::path(argv[0])).parent_path();
    fs::create_directories(ctx.work);

    std::set<int> wanted;
    std::stringstream ss(criteria);
    for (std::string item; std::getline(ss, item, ',');) {
        const int c = std::atoi(item.c_str());
        if (c < 1 || c > 5) {
            fmt::print(std::cerr, "unknown criterion '{}'\n", item);
            return socnav::cli::kExitUsage;
        }
        wanted.insert(c);
    }

    std::vector<Verdict> verdicts;
    try {
        if (wanted.count(1)) criterion1(ctx, verdicts);
        if (wanted.count(2)) criterion2(ctx, verdicts);
        if (wanted.count(3) || wanted.count(4) || wanted.count(5)) criteria345(ctx, wanted, verdicts);
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "acceptance run aborted: {}\n", e.what());
        return socnav::cli::kExitRuntime;
    }
    bool all = true;
    for (const auto& v : verdicts) all = all && v.pass;
    return all ? socnav::cli::kExitOk : socnav::cli::kExitAcceptance;
}
