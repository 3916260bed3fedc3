#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "socnav/vec2.hpp"

namespace socnav {

/// One of the 81 robot actions: Stop, or one of 5 speeds x 16 headings.
struct DiscreteAction {
    bool stop = true;
    int speed_index = 0;    ///< 1..5, 0 for Stop
    int heading_index = 0;  ///< 0..15
    double speed = 0.0;     ///< m/s
    double heading = 0.0;   ///< rad, world frame

    Vec2 velocity() const;
    bool operator==(const DiscreteAction&) const = default;
};

/// Speed number i (1..5) of the exponentially spaced ladder: (e^{i/5} - 1) / (e - 1) * v_pref.
double action_speed(int i, double v_pref);

class ActionSpace {
public:
    static constexpr int kSpeeds = 5;
    static constexpr int kHeadings = 16;
    static constexpr std::size_t kSize = 1 + kSpeeds * kHeadings;

    /// Stop first, then ordered by (speed index, heading index).
    explicit ActionSpace(double v_pref);

    double v_pref() const { return v_pref_; }
    std::size_t size() const { return actions_.size(); }
    const DiscreteAction& operator[](std::size_t i) const { return actions_[i]; }
    std::span<const DiscreteAction> actions() const { return actions_; }

    /// Position of an action in the deterministic order; throws InvalidActionError
    /// when the action is not a member of this space.
    std::size_t index_of(const DiscreteAction& action) const;
    bool contains(const DiscreteAction& action) const;

private:
    double v_pref_;
    std::vector<DiscreteAction> actions_;
};

inline std::vector<DiscreteAction> build_action_space(double v_pref) {
    const ActionSpace space(v_pref);
    return {space.actions().begin(), space.actions().end()};
}

}  // namespace socnav
