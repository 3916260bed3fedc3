#include "socnav/track_history.hpp"

#include <cmath>
#include <stdexcept>

namespace socnav {

TrackHistory::TrackHistory(double dt, std::size_t capacity) : dt_(dt), capacity_(capacity) {
    if (!(dt > 0.0)) throw std::invalid_argument("track history dt must be positive");
    if (capacity < 2) throw std::invalid_argument("track history capacity must be at least 2");
}

void TrackHistory::push(double stamp, const Vec2& position) {
    if (!samples_.empty() && std::abs(stamp - samples_.back().stamp - dt_) > 1e-9)
        throw std::invalid_argument("track history stamps must increase by dt");
    samples_.push_back({stamp, position});
    if (samples_.size() > capacity_) samples_.pop_front();
}

}  // namespace socnav
