#include "socnav/action_space.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "socnav/error.hpp"

namespace socnav {

Vec2 DiscreteAction::velocity() const {
    if (stop) return {};
    return {speed * std::cos(heading), speed * std::sin(heading)};
}

double action_speed(int i, double v_pref) {
    return (std::exp(i / 5.0) - 1.0) / (std::numbers::e - 1.0) * v_pref;
}

ActionSpace::ActionSpace(double v_pref) : v_pref_(v_pref) {
    if (!(v_pref > 0.0)) throw std::invalid_argument("action space needs v_pref > 0");
    actions_.reserve(kSize);
    actions_.push_back(DiscreteAction{});
    for (int i = 1; i <= kSpeeds; ++i) {
        const double speed = i == kSpeeds ? v_pref : action_speed(i, v_pref);
        for (int k = 0; k < kHeadings; ++k) {
            actions_.push_back({false, i, k, speed, 2.0 * std::numbers::pi * k / kHeadings});
        }
    }
}

std::size_t ActionSpace::index_of(const DiscreteAction& action) const {
    if (action.stop) {
        if (action.speed_index != 0 || action.speed != 0.0) throw InvalidActionError("malformed stop action");
        return 0;
    }
    if (action.speed_index < 1 || action.speed_index > kSpeeds || action.heading_index < 0 ||
        action.heading_index >= kHeadings)
        throw InvalidActionError("action indices outside the discrete action space");
    const std::size_t idx = 1 + static_cast<std::size_t>(action.speed_index - 1) * kHeadings +
                            static_cast<std::size_t>(action.heading_index);
    if (!(actions_[idx] == action)) throw InvalidActionError("action does not match the discrete action space");
    return idx;
}

bool ActionSpace::contains(const DiscreteAction& action) const {
    try {
        index_of(action);
        return true;
    } catch (const InvalidActionError&) {
        return false;
    }
}

}  // namespace socnav
