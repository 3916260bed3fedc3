#include "socnav/trajectory_log.hpp"

#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "socnav/error.hpp"

namespace socnav {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::vector<TrajectoryRecord> trajectory_records(int episode, const EpisodeOutcome& outcome) {
    std::vector<TrajectoryRecord> out;
    for (const auto& snap : outcome.trajectory) {
        const auto& r = snap.robot;
        out.push_back({episode, snap.step, 0, r.px, r.py, r.vx, r.vy, r.radius, std::nullopt, "robot", std::nullopt});
        for (std::size_t i = 0; i < snap.pedestrians.size(); ++i) {
            const auto& p = snap.pedestrians[i];
            const auto& o = p.observable;
            std::optional<double> rho;
            if (p.policy == PolicyTag::NoisyOrca) rho = p.rho;
            out.push_back({episode, snap.step, static_cast<int>(i) + 1, o.px, o.py, o.vx, o.vy, o.radius, rho,
                           std::string(to_string(p.policy)), p.rho_hat});
        }
    }
    return out;
}

void write_trajectory_record(std::ostream& out, const TrajectoryRecord& rec) {
    ordered_json j;
    j["episode"] = rec.episode;
    j["step"] = rec.step;
    j["agent"] = rec.agent;
    j["px"] = rec.px;
    j["py"] = rec.py;
    j["vx"] = rec.vx;
    j["vy"] = rec.vy;
    j["radius"] = rec.radius;
    j["rho"] = optional_number(rec.rho);
    j["policy"] = rec.policy;
    j["rho_hat"] = optional_number(rec.rho_hat);
    out << j.dump() << '\n';
}

void write_trajectory_log(std::ostream& out, int episode, const EpisodeOutcome& outcome) {
    for (const auto& rec : trajectory_records(episode, outcome)) write_trajectory_record(out, rec);
}

std::vector<TrajectoryRecord> read_trajectory_log(std::istream& in) {
    std::vector<TrajectoryRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TrajectoryRecord rec;
            rec.episode = j.at("episode").get<int>();
            rec.step = j.at("step").get<int>();
            rec.agent = j.at("agent").get<int>();
            rec.px = j.at("px").get<double>();
            rec.py = j.at("py").get<double>();
            rec.vx = j.at("vx").get<double>();
            rec.vy = j.at("vy").get<double>();
            rec.radius = j.at("radius").get<double>();
            if (!j.at("rho").is_null()) rec.rho = j.at("rho").get<double>();
            rec.policy = j.value("policy", std::string{});
            if (j.contains("rho_hat") && !j.at("rho_hat").is_null()) rec.rho_hat = j.at("rho_hat").get<double>();
            records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed trajectory record: ") + e.what(), line_no);
        }
    }
    return records;
}

}  // namespace socnav
