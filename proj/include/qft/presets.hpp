#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qft/dispersion.hpp"

namespace qft::presets {

/// MI source fiber. beta4 and dn are fitted to the measured sideband pair at
/// an 808 nm pump; beta3 is fixed because a common rescaling of beta3, beta4
/// and dn leaves the sidebands unchanged.
dispersion::FiberSpec fiber1();

/// Translation fiber. The ZDW is placed where the 808/683 -> 845/659 quartet
/// is phase matched on a single axis.
dispersion::FiberSpec fiber2();

/// Fiber 1 polarization roles: pump on the slow axis, both sidebands fast.
dispersion::AxisAssignment fiber1_axes();
/// Alternative assignment with the pump fast and the sidebands slow.
dispersion::AxisAssignment fiber1_axes_swapped();

/// Measured Fiber 1 sideband points used for the fit.
std::span<const dispersion::SidebandPoint> fiber1_sidebands();

/// Built-in fiber by name ("fiber1", "fiber2").
std::optional<dispersion::FiberSpec> find_fiber(std::string_view name);
std::vector<std::string> fiber_names();

}  // namespace qft::presets
