#pragma once

#include <cstddef>
#include <deque>

#include "socnav/vec2.hpp"

namespace socnav {

/// Bounded chronological record of one pedestrian's world-frame positions.
class TrackHistory {
public:
    struct Sample {
        double stamp;
        Vec2 position;
    };

    static constexpr std::size_t kDefaultCapacity = 21;

    explicit TrackHistory(double dt = 0.25, std::size_t capacity = kDefaultCapacity);

    /// Appends a sample; stamps must advance by exactly dt (to 1e-9).
    void push(double stamp, const Vec2& position);

    void clear() { samples_.clear(); }

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t capacity() const { return capacity_; }
    double dt() const { return dt_; }

    /// i = 0 is the oldest retained sample.
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    const Sample& back() const { return samples_.back(); }

private:
    double dt_;
    std::size_t capacity_;
    std::deque<Sample> samples_;
};

}  // namespace socnav
