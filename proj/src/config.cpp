#include "socnav/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "socnav/error.hpp"

namespace socnav {

const std::vector<ConfigKey>& config_registry() {
    static const std::vector<ConfigKey> keys = {
        {"run", "seed", "1", "root seed for every random stream"},
        {"run", "jobs", "1", "worker count (runs are sequential when 1)"},

        {"sim", "dt", "0.25", "time step (s)"},
        {"sim", "time_limit", "30", "evaluation episode limit (s)"},
        {"sim", "robot_visible", "false", "whether pedestrians react to the robot"},
        {"sim", "robot_radius", "0.3", "robot radius (m)"},
        {"sim", "robot_v_pref", "1.0", "robot preferred speed (m/s)"},
        {"sim", "circle_radius", "4.0", "circle-crossing radius (m)"},
        {"sim", "room_size", "10.0", "flow/crossing room side (m)"},
        {"sim", "arena_size", "8.0", "random-goal arena side (m)"},
        {"sim", "ped_goal_tolerance", "0.05", "pedestrian arrival distance (m)"},

        {"crowd", "scenario", "circle", "scenario kind"},
        {"crowd", "pedestrians", "5", "pedestrian count"},
        {"crowd", "policy", "orca", "orca, noisy_orca, linear or social_force"},
        {"crowd", "rho_max", "0.0", "Noisy-ORCA deviation upper bound"},
        {"crowd", "radius", "0.3", "pedestrian radius (m)"},
        {"crowd", "v_pref", "1.0", "pedestrian preferred speed (m/s)"},
        {"crowd", "time_horizon", "5.0", "ORCA time horizon (s)"},
        {"crowd", "neighbor_dist", "10.0", "ORCA neighbor radius (m)"},
        {"crowd", "max_neighbors", "10", "ORCA neighbor cap"},
        {"crowd", "radius_padding", "0.01", "ORCA solver padding per agent radius (m)"},

        {"reward", "k_succ", "1.0", "success reward"},
        {"reward", "k_coll", "-0.25", "collision penalty"},
        {"reward", "k_disc", "0.125", "discomfort factor"},
        {"reward", "d_disc_const", "0.1", "constant discomfort distance (m)"},
        {"reward", "slope", "1.0", "a in d_disc = a rho + b"},
        {"reward", "intercept", "0.2", "b in d_disc = a rho + b (m)"},

        {"train", "variant", "reward", "sarl, training, model or reward"},
        {"train", "gamma", "0.9", "discount factor"},
        {"train", "normalized_discount", "false", "discount gamma^(dt v_pref) per step"},
        {"train", "lr", "0.001", "learning rate"},
        {"train", "momentum", "0.9", "SGD momentum"},
        {"train", "batch", "100", "minibatch size"},
        {"train", "episodes", "12000", "training episodes"},
        {"train", "target_update", "50", "episodes between target-network copies"},
        {"train", "epsilon_start", "0.5", "initial exploration rate"},
        {"train", "epsilon_end", "0.1", "final exploration rate"},
        {"train", "epsilon_decay", "4000", "episodes of linear epsilon decay"},
        {"train", "t_max", "120", "steps per training episode"},
        {"train", "stage_length", "2000", "episodes per curriculum stage"},
        {"train", "rho_step", "0.1", "curriculum rho_max increment"},
        {"train", "rho_cap", "0.5", "curriculum rho_max ceiling"},
        {"train", "demo_episodes", "2000", "ORCA demonstration episodes"},
        {"train", "demo_safety_margin", "0.2", "demonstrator ORCA clearance (m)"},
        {"train", "buffer_capacity", "100000", "replay capacity"},
        {"train", "imitation_epochs", "50", "supervised epochs on demo returns"},
        {"train", "imitation_lr", "0.01", "learning rate of the supervised epochs"},
        {"train", "heading", "world", "world or goal_relative heading feature"},
        {"train", "checkpoint_interval", "500", "episodes between checkpoints (0 = final only)"},

        {"uncertainty", "episodes", "500", "Noisy-ORCA rollouts for the dataset"},
        {"uncertainty", "rho_max", "1.0", "rho upper bound of the dataset"},
        {"uncertainty", "pedestrians", "5", "pedestrians per rollout"},
        {"uncertainty", "steps", "120", "steps per rollout"},
        {"uncertainty", "scenario", "perpetual_random_goals", "rollout scenario"},
        {"uncertainty", "max_windows", "1000000", "window cap per history length"},
        {"uncertainty", "lengths", "", "history lengths to train (empty = 1..20)"},
        {"uncertainty", "epochs", "30", "training epochs per model"},
        {"uncertainty", "batch", "64", "minibatch size"},
        {"uncertainty", "lr", "0.01", "learning rate"},
        {"uncertainty", "momentum", "0.9", "SGD momentum"},
        {"uncertainty", "validation_fraction", "0.1", "held-out share"},
        {"uncertainty", "prior", "0.0", "estimate for pedestrians without history"},
        {"uncertainty", "smoothing", "0.0", "exponential smoothing weight (0 = off)"},

        {"eval", "trials", "200", "trials per configuration"},
        {"eval", "scenario", "circle", "scenario kind"},
        {"eval", "min_pedestrians", "5", "smallest crowd"},
        {"eval", "max_pedestrians", "5", "largest crowd"},
        {"eval", "mixed", "false", "mixed ORCA/social-force/linear crowd with randomized parameters"},
        {"eval", "rho_grid", "0.0,0.1,0.2,0.3,0.4,0.5", "sweep-noise rho_max grid"},
        {"eval", "rho_source", "estimated", "estimated or ground_truth rho for learned policies"},
        {"eval", "sigma", "0.5", "personal-space Gaussian width (m)"},
        {"eval", "personal_threshold", "1.2", "personal zone (m)"},
        {"eval", "intimate_threshold", "0.45", "intimate zone (m)"},
        {"eval", "trajectories", "false", "write per-trial trajectory logs"},
    };
    return keys;
}

std::string config_env_name(const ConfigKey& key) {
    std::string name = "SOCNAV_" + key.section + "__" + key.key;
    for (auto& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return name;
}

Config::Config() {
    for (const auto& k : config_registry()) values_[k.dotted()] = k.default_value;
}

void Config::set(const std::string& dotted, const std::string& value) {
    const auto it = values_.find(dotted);
    if (it == values_.end()) throw ConfigError("unknown config key '" + dotted + "'");
    it->second = value;
}

void Config::merge_stream(std::istream& in, const std::string& origin) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(fmt::format("{}: line {}: {}", origin, e.line(), e.message()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(fmt::format("{}: key '{}' outside any section", origin, section));
        for (const auto& [key, value] : body) {
            const std::string dotted = section + "." + key;
            if (!values_.contains(dotted)) throw ConfigError(fmt::format("{}: unknown config key '{}'", origin, dotted));
            values_[dotted] = value.data();
        }
    }
}

void Config::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    merge_stream(in, path.string());
}

void Config::merge_environment() {
    for (const auto& k : config_registry())
        if (const char* v = std::getenv(config_env_name(k).c_str())) values_[k.dotted()] = v;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not section.key=value");
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

const std::string& Config::get(const std::string& dotted) const {
    const auto it = values_.find(dotted);
    if (it == values_.end()) throw ConfigError("unknown config key '" + dotted + "'");
    return it->second;
}

double Config::get_double(const std::string& dotted) const {
    const std::string& s = get(dotted);
    std::size_t used = 0;
    try {
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{} = '{}' is not a number", dotted, s));
}

int Config::get_int(const std::string& dotted) const {
    const std::string& s = get(dotted);
    std::size_t used = 0;
    try {
        const int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{} = '{}' is not an integer", dotted, s));
}

std::uint64_t Config::get_u64(const std::string& dotted) const {
    const std::string& s = get(dotted);
    std::size_t used = 0;
    try {
        if (!s.empty() && s[0] != '-') {
            const auto v = std::stoull(s, &used);
            if (used == s.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{} = '{}' is not a non-negative integer", dotted, s));
}

bool Config::get_bool(const std::string& dotted) const {
    std::string s = get(dotted);
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(fmt::format("{} = '{}' is not a boolean", dotted, s));
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

std::vector<double> Config::get_doubles(const std::string& dotted) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(dotted))) {
        std::size_t used = 0;
        try {
            out.push_back(std::stod(item, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ConfigError(fmt::format("{}: '{}' is not a number", dotted, item));
    }
    return out;
}

std::vector<int> Config::get_ints(const std::string& dotted) const {
    std::vector<int> out;
    for (const auto& item : split_list(get(dotted))) {
        std::size_t used = 0;
        try {
            out.push_back(std::stoi(item, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ConfigError(fmt::format("{}: '{}' is not an integer", dotted, item));
    }
    return out;
}

void Config::write(std::ostream& out) const {
    std::string section;
    for (const auto& k : config_registry()) {
        if (k.section != section) {
            if (!section.empty()) out << '\n';
            section = k.section;
            fmt::print(out, "[{}]\n", section);
        }
        fmt::print(out, "{} = {}\n", k.key, values_.at(k.dotted()));
    }
}

Config Config::resolve(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
    Config c;
    if (file) c.merge_file(*file);
    c.merge_environment();
    for (const auto& o : overrides) c.apply_override(o);
    return c;
}

SimConfig sim_config(const Config& c) {
    SimConfig s;
    s.dt = c.get_double("sim.dt");
    s.time_limit = c.get_double("sim.time_limit");
    s.robot_visible = c.get_bool("sim.robot_visible");
    s.robot_radius = c.get_double("sim.robot_radius");
    s.robot_v_pref = c.get_double("sim.robot_v_pref");
    s.geometry.circle_radius = c.get_double("sim.circle_radius");
    s.geometry.room_size = c.get_double("sim.room_size");
    s.geometry.arena_size = c.get_double("sim.arena_size");
    s.geometry.ped_goal_tolerance = c.get_double("sim.ped_goal_tolerance");
    if (!(s.dt > 0.0) || !(s.time_limit > 0.0) || !(s.robot_radius > 0.0) || !(s.robot_v_pref > 0.0))
        throw ConfigError("sim.dt, sim.time_limit, sim.robot_radius and sim.robot_v_pref must be positive");
    return s;
}

CrowdSpec crowd_spec(const Config& c) {
    CrowdSpec s;
    try {
        s.policy = parse_policy_tag(c.get("crowd.policy"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    s.rho_max = c.get_double("crowd.rho_max");
    s.radius = c.get_double("crowd.radius");
    s.v_pref = c.get_double("crowd.v_pref");
    s.orca.time_horizon = c.get_double("crowd.time_horizon");
    s.orca.neighbor_dist = c.get_double("crowd.neighbor_dist");
    s.orca.max_neighbors = c.get_int("crowd.max_neighbors");
    s.orca.radius_padding = c.get_double("crowd.radius_padding");
    if (!(s.rho_max >= 0.0 && s.rho_max <= 1.0)) throw ConfigError("crowd.rho_max must lie in [0, 1]");
    try {
        s.orca.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

RewardParams reward_params(const Config& c) {
    RewardParams p;
    p.k_succ = c.get_double("reward.k_succ");
    p.k_coll = c.get_double("reward.k_coll");
    p.k_disc = c.get_double("reward.k_disc");
    p.d_disc_const = c.get_double("reward.d_disc_const");
    p.slope = c.get_double("reward.slope");
    p.intercept = c.get_double("reward.intercept");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

namespace {

ScenarioKind scenario_of(const Config& c, const std::string& key) {
    try {
        return parse_scenario_kind(c.get(key));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

TrainerConfig trainer_config(const Config& c) {
    TrainerConfig t;
    t.hp.gamma = c.get_double("train.gamma");
    t.hp.lr = c.get_double("train.lr");
    t.hp.momentum = c.get_double("train.momentum");
    const int batch = c.get_int("train.batch");
    if (batch <= 0) throw ConfigError("train.batch must be positive");
    t.hp.batch = static_cast<std::size_t>(batch);
    t.hp.episodes = c.get_int("train.episodes");
    t.hp.target_update = c.get_int("train.target_update");
    t.hp.epsilon_start = c.get_double("train.epsilon_start");
    t.hp.epsilon_end = c.get_double("train.epsilon_end");
    t.hp.epsilon_decay = c.get_int("train.epsilon_decay");
    t.hp.t_max = c.get_int("train.t_max");
    t.hp.validate();

    t.variant = variant_settings(parse_training_variant(c.get("train.variant")));
    t.variant.stage_length = c.get_int("train.stage_length");
    t.variant.rho_step = c.get_double("train.rho_step");
    t.variant.rho_cap = c.get_double("train.rho_cap");
    if (t.variant.stage_length <= 0) throw ConfigError("train.stage_length must be positive");
    t.variant.reward_params = reward_params(c);
    if (t.variant.reward_params.d_disc_const != RewardParams{}.d_disc_const && t.variant.name == "sarl")
        t.variant.name = fmt::format("sarl_d{:.2f}", t.variant.reward_params.d_disc_const);

    t.pedestrians = c.get_int("crowd.pedestrians");
    t.scenario = scenario_of(c, "crowd.scenario");
    t.sim = sim_config(c);
    t.demo_episodes = c.get_int("train.demo_episodes");
    t.demo_orca.safety_margin = c.get_double("train.demo_safety_margin");
    const int capacity = c.get_int("train.buffer_capacity");
    if (capacity <= 0) throw ConfigError("train.buffer_capacity must be positive");
    t.buffer_capacity = static_cast<std::size_t>(capacity);
    t.imitation_epochs = c.get_int("train.imitation_epochs");
    t.imitation_lr = c.get_double("train.imitation_lr");
    t.normalized_discount = c.get_bool("train.normalized_discount");
    const std::string& heading = c.get("train.heading");
    if (heading == "world")
        t.heading = HeadingMode::WorldFrame;
    else if (heading == "goal_relative")
        t.heading = HeadingMode::GoalRelative;
    else
        throw ConfigError("train.heading must be world or goal_relative");
    t.checkpoint_interval = c.get_int("train.checkpoint_interval");
    return t;
}

UncertaintyDataConfig uncertainty_data_config(const Config& c) {
    UncertaintyDataConfig d;
    d.episodes = c.get_int("uncertainty.episodes");
    d.rho_max = c.get_double("uncertainty.rho_max");
    d.pedestrians = c.get_int("uncertainty.pedestrians");
    d.steps = c.get_int("uncertainty.steps");
    d.scenario = scenario_of(c, "uncertainty.scenario");
    d.max_windows = c.get_u64("uncertainty.max_windows");
    d.sim = sim_config(c);
    if (!(d.rho_max >= 0.0 && d.rho_max <= 1.0)) throw ConfigError("uncertainty.rho_max must lie in [0, 1]");
    if (d.episodes < 1 || d.pedestrians < 1 || d.steps < 2)
        throw ConfigError("uncertainty.episodes, .pedestrians must be >= 1 and .steps >= 2");
    return d;
}

UncertaintyTrainConfig uncertainty_train_config(const Config& c) {
    UncertaintyTrainConfig u;
    u.epochs = c.get_int("uncertainty.epochs");
    const int batch = c.get_int("uncertainty.batch");
    if (batch <= 0 || u.epochs <= 0) throw ConfigError("uncertainty.batch and uncertainty.epochs must be positive");
    u.batch = static_cast<std::size_t>(batch);
    u.lr = c.get_double("uncertainty.lr");
    u.momentum = c.get_double("uncertainty.momentum");
    u.validation_fraction = c.get_double("uncertainty.validation_fraction");
    if (!(u.validation_fraction > 0.0 && u.validation_fraction < 1.0))
        throw ConfigError("uncertainty.validation_fraction must lie in (0, 1)");
    return u;
}

EstimatorConfig estimator_config(const Config& c) {
    EstimatorConfig e;
    e.prior = c.get_double("uncertainty.prior");
    e.smoothing = c.get_double("uncertainty.smoothing");
    if (!(e.prior >= 0.0 && e.prior <= 1.0)) throw ConfigError("uncertainty.prior must lie in [0, 1]");
    if (!(e.smoothing >= 0.0 && e.smoothing < 1.0)) throw ConfigError("uncertainty.smoothing must lie in [0, 1)");
    return e;
}

BenchmarkConfig benchmark_config(const Config& c) {
    BenchmarkConfig b;
    b.scenario = scenario_of(c, "eval.scenario");
    b.min_pedestrians = c.get_int("eval.min_pedestrians");
    b.max_pedestrians = c.get_int("eval.max_pedestrians");
    if (b.min_pedestrians < 0 || b.max_pedestrians < b.min_pedestrians)
        throw ConfigError("eval.min_pedestrians must be >= 0 and <= eval.max_pedestrians");
    b.crowd = c.get_bool("eval.mixed") ? mixed_crowd() : crowd_spec(c);
    b.sim = sim_config(c);
    b.trials = c.get_int("eval.trials");
    if (b.trials < 1) throw ConfigError("eval.trials must be positive");
    b.keep_trajectories = c.get_bool("eval.trajectories");
    b.metrics.sigma = c.get_double("eval.sigma");
    b.metrics.personal_threshold = c.get_double("eval.personal_threshold");
    b.metrics.intimate_threshold = c.get_double("eval.intimate_threshold");
    return b;
}

}  // namespace socnav
