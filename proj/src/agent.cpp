#include "socnav/agent.hpp"

#include <stdexcept>
#include <string>

namespace socnav {

void AgentFullState::validate(bool check_speed) const {
    if (!(radius > 0.0)) throw std::invalid_argument("agent radius must be positive, got " + std::to_string(radius));
    if (!(v_pref > 0.0)) throw std::invalid_argument("agent v_pref must be positive, got " + std::to_string(v_pref));
    if (check_speed && norm(velocity()) > v_pref + 1e-9)
        throw std::invalid_argument("agent speed exceeds v_pref");
}

}  // namespace socnav
