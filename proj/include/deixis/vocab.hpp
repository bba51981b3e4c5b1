#pragma once

#include <map>
#include <string>
#include <vector>

#include "deixis/geometry.hpp"

namespace deixis::vocab {

const std::vector<std::string>& categories();
const std::vector<std::string>& colors();
const std::vector<std::string>& materials();
const std::vector<std::string>& shapes();

/// Half-extent (x, y, z) of a category's bounding box, meters.
Vec3 category_half_extent(const std::string& category);

/// State pair applicable to a category, e.g. {"full", "empty"}.
std::pair<std::string, std::string> category_state_pair(const std::string& category);

/// Opposite of an attribute value ("open" -> "closed"); empty when none.
std::string opposite_state(const std::string& value);

/// Goal phrases for Feedback questions mapped to the categories that suit them.
const std::vector<std::pair<std::string, std::vector<std::string>>>& affordance_goals();

/// Goals that a category satisfies / does not satisfy.
std::vector<std::string> goals_suiting(const std::string& category);
std::vector<std::string> goals_not_suiting(const std::string& category);

} // namespace deixis::vocab
