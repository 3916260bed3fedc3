#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "socnav/action_space.hpp"
#include "socnav/cli.hpp"
#include "socnav/error.hpp"
#include "socnav/evaluator.hpp"
#include "socnav/reward.hpp"
#include "socnav/trainer.hpp"
#include "socnav/world.hpp"

namespace py = pybind11;
using namespace socnav;

namespace {

using XY = std::pair<double, double>;

XY xy(const Vec2& v) { return {v.x, v.y}; }

TailDirection parse_tail(const std::string& tail) {
    if (tail == "cost") return TailDirection::Cost;
    if (tail == "benefit") return TailDirection::Benefit;
    throw std::invalid_argument("tail must be 'cost' or 'benefit'");
}

/// Small stateful wrapper so Python can drive one episode step by step.
class World {
public:
    World(const std::string& scenario, int pedestrians, std::uint64_t seed, const std::string& policy, double rho_max,
          bool robot_visible) {
        SimConfig sim;
        sim.robot_visible = robot_visible;
        CrowdSpec crowd;
        crowd.policy = parse_policy_tag(policy);
        crowd.rho_max = rho_max;
        world_ = generate_scenario(parse_scenario_kind(scenario), pedestrians, seed, sim, crowd);
    }

    py::dict step_action(std::size_t index) {
        const ActionSpace space(world_.robot.v_pref);
        if (index >= space.size()) throw py::index_error("action index out of range");
        return events(step_environment(world_, space[index]));
    }

    py::dict step_velocity(double vx, double vy) { return events(step_environment(world_, HolonomicVelocity{{vx, vy}})); }

    py::dict step_orca() {
        OrcaRobotPolicy orca;
        return events(step_environment(world_, orca.act(world_)));
    }

    XY robot_position() const { return xy(world_.robot.position()); }
    XY robot_goal() const { return xy(world_.robot.goal()); }
    std::vector<XY> pedestrian_positions() const {
        std::vector<XY> out;
        for (const auto& p : world_.pedestrians) out.push_back(xy(p.state.position()));
        return out;
    }
    std::vector<XY> pedestrian_velocities() const {
        std::vector<XY> out;
        for (const auto& p : world_.pedestrians) out.push_back(xy(p.state.velocity()));
        return out;
    }
    std::vector<double> rhos() const { return world_.rhos(); }
    double time() const { return world_.sim_time; }
    int steps() const { return world_.step_count; }
    bool timed_out() const { return world_.timed_out(); }

private:
    static py::dict events(const StepEvents& e) {
        py::dict d;
        int hits = 0;
        for (bool c : e.collisions) hits += c;
        d["collisions"] = hits;
        d["reached_goal"] = e.robot_reached_goal;
        d["min_surface_distance"] = e.min_surface_distance;
        return d;
    }

    WorldState world_;
};

}  // namespace

PYBIND11_MODULE(_socnav, m) {
    m.doc() = "Crowd navigation simulator, rewards and evaluation helpers";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidActionError>(m, "InvalidActionError", PyExc_ValueError);

    m.def("action_speed", &action_speed, py::arg("i"), py::arg("v_pref") = 1.0);
    m.def(
        "action_space",
        [](double v_pref) {
            const ActionSpace space(v_pref);
            std::vector<std::pair<double, double>> out;
            for (const auto& a : space.actions()) out.emplace_back(a.speed, a.heading);
            return out;
        },
        py::arg("v_pref") = 1.0, "(speed, heading) pairs in index order; Stop first.");

    m.def("discomfort_distance", [](double rho) { return discomfort_distance(rho); }, py::arg("rho"));
    m.def(
        "default_reward",
        [](double goal_distance, const std::vector<double>& ped_distances) {
            return default_reward(goal_distance, ped_distances);
        },
        py::arg("goal_distance"), py::arg("ped_distances"));
    m.def(
        "modified_reward",
        [](double goal_distance, const std::vector<double>& ped_distances, const std::vector<double>& rhos) {
            if (ped_distances.size() != rhos.size()) throw std::invalid_argument("one rho per pedestrian");
            return modified_reward(goal_distance, ped_distances, rhos);
        },
        py::arg("goal_distance"), py::arg("ped_distances"), py::arg("rhos"));

    m.def(
        "cvar",
        [](const std::vector<double>& values, double q, const std::string& tail) {
            return cvar(values, q, parse_tail(tail));
        },
        py::arg("values"), py::arg("q"), py::arg("tail") = "cost");

    m.def(
        "curriculum_rho_max", [](int episode, int stage_length) { return curriculum_rho_max(episode, stage_length); },
        py::arg("episode"), py::arg("stage_length") = 2000);
    m.def("epsilon_schedule", [](int episode) { return epsilon_schedule(episode); }, py::arg("episode"));

    py::class_<World>(m, "World")
        .def(py::init<const std::string&, int, std::uint64_t, const std::string&, double, bool>(),
             py::arg("scenario") = "circle", py::arg("pedestrians") = 5, py::arg("seed") = 1,
             py::arg("policy") = "orca", py::arg("rho_max") = 0.0, py::arg("robot_visible") = false)
        .def("step_action", &World::step_action, py::arg("index"))
        .def("step_velocity", &World::step_velocity, py::arg("vx"), py::arg("vy"))
        .def("step_orca", &World::step_orca)
        .def_property_readonly("robot_position", &World::robot_position)
        .def_property_readonly("robot_goal", &World::robot_goal)
        .def_property_readonly("pedestrian_positions", &World::pedestrian_positions)
        .def_property_readonly("pedestrian_velocities", &World::pedestrian_velocities)
        .def_property_readonly("rhos", &World::rhos)
        .def_property_readonly("time", &World::time)
        .def_property_readonly("steps", &World::steps)
        .def_property_readonly("timed_out", &World::timed_out);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::dispatch(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run one CLI subcommand in-process; returns (exit code, stdout, stderr).");
}
