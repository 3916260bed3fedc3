#include "socnav/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "socnav/config.hpp"
#include "socnav/error.hpp"
#include "socnav/evaluator.hpp"
#include "socnav/svg.hpp"
#include "socnav/trainer.hpp"
#include "socnav/trajectory_log.hpp"
#include "socnav/uncertainty.hpp"
#include "socnav/value_policy.hpp"

namespace socnav::cli {
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    std::optional<int> jobs;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config_file, "config file (INI sections)");
    app->add_option("-s,--seed", c.seed, "root seed (overrides run.seed)");
    app->add_option("-o,--out", c.out_dir, "output directory")->capture_default_str();
    app->add_option("--set", c.overrides, "section.key=value override (repeatable)");
    app->add_option("-j,--jobs", c.jobs, "worker threads for evaluation");
}

Config resolve(const Common& c, std::vector<std::string> extra = {}) {
    std::vector<std::string> overrides = c.overrides;
    if (c.seed) overrides.push_back(fmt::format("run.seed={}", *c.seed));
    if (c.jobs) overrides.push_back(fmt::format("run.jobs={}", *c.jobs));
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    std::optional<fs::path> file;
    if (!c.config_file.empty()) file = c.config_file;
    return Config::resolve(file, overrides);
}

fs::path prepare_out(const Common& c, const Config& config) {
    const fs::path dir = c.out_dir;
    fs::create_directories(dir);
    std::ofstream echo(dir / "config.echo");
    if (!echo) throw ConfigError("cannot write to output directory " + dir.string());
    config.write(echo);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::shared_ptr<const UncertaintyBank> load_bank(const std::string& dir) {
    if (dir.empty()) return nullptr;
    if (!fs::exists(fs::path(dir) / "manifest.json")) throw ConfigError("no uncertainty bank at " + dir);
    return std::make_shared<const UncertaintyBank>(UncertaintyBank::load(dir));
}

/// "orca", "stop" or "name=checkpoint.snck" (a bare path takes the file stem as name).
PolicyEntry make_policy(const std::string& spec, const Config& config,
                        const std::shared_ptr<const UncertaintyBank>& bank) {
    if (spec == "orca") return {"orca", [] { return std::make_unique<OrcaRobotPolicy>(); }};
    if (spec == "stop") return {"stop", [] { return std::make_unique<StopPolicy>(); }};

    std::string name;
    fs::path path;
    if (const auto eq = spec.find('='); eq != std::string::npos) {
        name = spec.substr(0, eq);
        path = spec.substr(eq + 1);
    } else {
        path = spec;
        name = path.stem().string();
    }
    if (!fs::exists(path)) throw ConfigError("checkpoint not found: " + path.string());
    const nn::Checkpoint ckpt = nn::load_checkpoint(path);
    auto net = std::make_shared<const ValueNetwork>(ValueNetwork::from_checkpoint(ckpt));
    const LookaheadConfig lookahead = lookahead_from_checkpoint(ckpt);
    RhoSource source = RhoSource::None;
    if (lookahead.feed_rho || lookahead.reward.variant() == RewardVariant::Modified) {
        source = parse_rho_source(config.get("eval.rho_source"));
        if (source == RhoSource::Estimated && !bank)
            throw ConfigError("policy '" + name + "' needs rho estimates: pass --bank or set eval.rho_source=ground_truth");
    }
    const EstimatorConfig estimator = estimator_config(config);
    return {name, [=] {
                return std::make_unique<ValueNetworkPolicy>(net, lookahead, source, source == RhoSource::Estimated ? bank : nullptr,
                                                            estimator, name);
            }};
}

std::vector<PolicyEntry> make_policies(const std::vector<std::string>& specs, const Config& config,
                                       const std::shared_ptr<const UncertaintyBank>& bank) {
    if (specs.empty()) throw ConfigError("at least one --policy is required");
    std::vector<PolicyEntry> out;
    for (const auto& s : specs) out.push_back(make_policy(s, config, bank));
    return out;
}

void write_trajectories(const fs::path& dir, const BenchmarkReport& report) {
    fs::create_directories(dir);
    for (const auto& t : report.trials) {
        if (t.outcome.trajectory.empty()) continue;
        std::ofstream out(dir / fmt::format("{}_trial{:04d}.jsonl", t.policy, t.trial));
        write_trajectory_log(out, t.trial, t.outcome);
    }
}

void write_report_files(const fs::path& dir, const std::string& stem, const BenchmarkReport& report, bool trajectories) {
    std::ostringstream csv, table, trials;
    write_report_csv(csv, report);
    write_report_table(table, report);
    write_trials_csv(trials, report);
    write_file(dir / (stem + ".csv"), csv.str());
    write_file(dir / (stem + ".txt"), table.str());
    write_file(dir / (stem + "_trials.csv"), trials.str());
    if (trajectories) write_trajectories(dir / "trajectories", report);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Crowd navigation simulation, training and benchmarking", "socnav"};
    app.require_subcommand(1);
    Common common;

    auto* gen = app.add_subcommand("gen-uncertainty-data", "roll out Noisy-ORCA crowds for the deviation estimator");
    add_common(gen, common);

    auto* train_unc = app.add_subcommand("train-uncertainty", "train the per-history-length deviation estimators");
    add_common(train_unc, common);
    std::string data_path;
    std::string lengths;
    train_unc->add_option("--data", data_path, "dataset from gen-uncertainty-data (generated when omitted)");
    train_unc->add_option("--lengths", lengths, "comma-separated history lengths (default: uncertainty.lengths)");

    auto* train = app.add_subcommand("train-policy", "value-iteration training of the navigation policy");
    add_common(train, common);
    std::string variant;
    std::optional<int> episodes;
    train->add_option("--variant", variant, "sarl, training, model or reward");
    train->add_option("--episodes", episodes, "training episodes");

    auto* evaluate = app.add_subcommand("evaluate", "benchmark policies on a shared scenario sequence");
    add_common(evaluate, common);
    std::vector<std::string> policies;
    std::string bank_dir;
    evaluate->add_option("-p,--policy", policies, "orca, stop or name=checkpoint (repeatable)");
    evaluate->add_option("--bank", bank_dir, "uncertainty bank directory");

    auto* sweep = app.add_subcommand("sweep-noise", "evaluate across Noisy-ORCA rho_max levels");
    add_common(sweep, common);
    sweep->add_option("-p,--policy", policies, "orca, stop or name=checkpoint (repeatable)");
    sweep->add_option("--bank", bank_dir, "uncertainty bank directory");

    auto* simulate = app.add_subcommand("simulate", "run one episode and log its trajectory");
    add_common(simulate, common);
    std::string scenario = "circle";
    int peds = 5;
    std::string robot = "orca";
    double rho_max = 0.0;
    std::string ped_policy;
    simulate->add_option("--scenario", scenario, "scenario kind")->capture_default_str();
    simulate->add_option("--peds", peds, "pedestrian count")->capture_default_str();
    simulate->add_option("--policy", robot, "robot policy: orca, stop or checkpoint path")->capture_default_str();
    simulate->add_option("--ped-policy", ped_policy, "pedestrian policy (default: crowd.policy)");
    simulate->add_option("--rho-max", rho_max, "Noisy-ORCA rho_max");
    simulate->add_option("--bank", bank_dir, "uncertainty bank directory");

    auto* plot = app.add_subcommand("plot", "render a trajectory log as SVG");
    std::string log_path;
    std::string svg_path;
    plot->add_option("--log", log_path, "trajectory log (JSON lines)")->required();
    plot->add_option("--output", svg_path, "SVG file (default: next to the log)");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const Config config = resolve(common);
            const fs::path dir = prepare_out(common, config);
            const auto data = generate_training_set(uncertainty_data_config(config), config.get_u64("run.seed"));
            save_dataset(dir / "uncertainty_data.bin", data);
            fmt::print(out, "{} tracks written to {}\n", data.tracks.size(), (dir / "uncertainty_data.bin").string());
            for (int t : {1, 5, 10, 20}) fmt::print(out, "t = {:2d}: {} windows\n", t, data.window_count(t));
            return kExitOk;
        }

        if (train_unc->parsed()) {
            std::vector<std::string> extra;
            if (!lengths.empty()) extra.push_back("uncertainty.lengths=" + lengths);
            const Config config = resolve(common, extra);
            const fs::path dir = prepare_out(common, config);
            const std::uint64_t seed = config.get_u64("run.seed");
            UncertaintyDataset data;
            if (!data_path.empty()) {
                if (!fs::exists(data_path)) throw ConfigError("dataset not found: " + data_path);
                data = load_dataset(data_path);
            } else {
                data = generate_training_set(uncertainty_data_config(config), seed);
            }
            const std::vector<int> ts = config.get_ints("uncertainty.lengths");
            for (int t : ts)
                if (t < 1 || t > kMaxHistorySteps) throw ConfigError("uncertainty.lengths entries must lie in [1, 20]");
            std::vector<ModelReport> reports;
            const UncertaintyBank bank = train_uncertainty_models(data, uncertainty_train_config(config), seed, ts, &reports);
            bank.save(dir / "uncertainty_bank", reports);
            std::ostringstream csv;
            csv << "t,n_train,n_validation,best_epoch,validation_mae,residual_mean,residual_std,within_0.25\n";
            for (const auto& r : reports)
                fmt::print(csv, "{},{},{},{},{:.6f},{:.6f},{:.6f},{:.4f}\n", r.t, r.n_train, r.n_validation, r.best_epoch,
                           r.validation_mae, r.residual_mean, r.residual_std, r.within_quarter);
            write_file(dir / "uncertainty_report.csv", csv.str());
            out << csv.str();
            return kExitOk;
        }

        if (train->parsed()) {
            std::vector<std::string> extra;
            if (!variant.empty()) extra.push_back("train.variant=" + variant);
            if (episodes) extra.push_back(fmt::format("train.episodes={}", *episodes));
            const Config config = resolve(common, extra);
            const fs::path dir = prepare_out(common, config);
            TrainerConfig tc = trainer_config(config);
            tc.out_dir = dir;
            tc.on_episode = [&](const EpisodeLog& row) {
                if ((row.episode + 1) % 100 == 0)
                    fmt::print(out, "episode {} {} eps {:.3f} rho_max {:.2f} loss {:.4g}\n", row.episode + 1,
                               to_string(row.outcome), row.epsilon, row.rho_max, row.loss_mean);
            };
            train_value_network(tc, config.get_u64("run.seed"));
            fmt::print(out, "checkpoint written to {}\n", (dir / "checkpoints" / "final.snck").string());
            return kExitOk;
        }

        if (evaluate->parsed()) {
            const Config config = resolve(common);
            const auto bank = load_bank(bank_dir);
            const auto entries = make_policies(policies, config, bank);
            const fs::path dir = prepare_out(common, config);
            BenchmarkConfig bc = benchmark_config(config);
            bc.jobs = config.get_int("run.jobs");
            const BenchmarkReport report = run_benchmark(entries, bc, config.get_u64("run.seed"));
            write_report_files(dir, "report", report, bc.keep_trajectories);
            write_report_table(out, report);
            return kExitOk;
        }

        if (sweep->parsed()) {
            const Config config = resolve(common);
            const auto bank = load_bank(bank_dir);
            const auto entries = make_policies(policies, config, bank);
            const fs::path dir = prepare_out(common, config);
            BenchmarkConfig bc = benchmark_config(config);
            bc.jobs = config.get_int("run.jobs");
            const std::vector<double> grid = config.get_doubles("eval.rho_grid");
            if (grid.empty()) throw ConfigError("eval.rho_grid is empty");
            const auto points = sweep_noisy_eval(entries, grid, bc, config.get_u64("run.seed"));
            std::ostringstream csv;
            write_sweep_csv(csv, points);
            write_file(dir / "sweep.csv", csv.str());
            for (const auto& p : points)
                write_report_files(dir, fmt::format("report_rho{:.2f}", p.rho_max), p.report, false);
            out << csv.str();
            return kExitOk;
        }

        if (simulate->parsed()) {
            std::vector<std::string> extra{"crowd.scenario=" + scenario, fmt::format("crowd.pedestrians={}", peds)};
            if (!ped_policy.empty()) extra.push_back("crowd.policy=" + ped_policy);
            if (rho_max > 0.0) {
                extra.push_back(fmt::format("crowd.rho_max={}", rho_max));
                if (ped_policy.empty()) extra.push_back("crowd.policy=noisy_orca");
            }
            const Config config = resolve(common, extra);
            const auto bank = load_bank(bank_dir);
            const PolicyEntry entry = make_policy(robot, config, bank);
            const fs::path dir = prepare_out(common, config);
            const WorldState world = generate_scenario(parse_scenario_kind(config.get("crowd.scenario")),
                                                       config.get_int("crowd.pedestrians"), config.get_u64("run.seed"),
                                                       sim_config(config), crowd_spec(config));
            auto policy = entry.make();
            const EpisodeOutcome outcome = run_episode(world, *policy, EpisodeMode::Evaluation, true);
            const fs::path log = dir / "trajectories" / "episode.jsonl";
            std::ostringstream text;
            write_trajectory_log(text, 0, outcome);
            write_file(log, text.str());
            fmt::print(out, "{} after {} steps ({} collisions); log {}\n",
                       outcome.reached_goal && outcome.collision_count == 0 ? "success"
                       : outcome.collision_count > 0                       ? "collision"
                                                                           : "timeout",
                       outcome.steps, outcome.collision_count, log.string());
            return kExitOk;
        }

        if (plot->parsed()) {
            std::ifstream in(log_path);
            if (!in) throw ConfigError("cannot read trajectory log " + log_path);
            const auto records = read_trajectory_log(in);
            fs::path target = svg_path.empty() ? fs::path(log_path).replace_extension(".svg") : fs::path(svg_path);
            write_file(target, render_svg(records));
            fmt::print(out, "wrote {}\n", target.string());
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace socnav::cli
