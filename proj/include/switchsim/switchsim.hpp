#pragma once

#include "switchsim/cable_path.hpp"
#include "switchsim/config.hpp"
#include "switchsim/error.hpp"
#include "switchsim/experiments.hpp"
#include "switchsim/gear_geometry.hpp"
#include "switchsim/motion_profile.hpp"
#include "switchsim/optimizer.hpp"
#include "switchsim/plant.hpp"
#include "switchsim/switch_state.hpp"
#include "switchsim/units.hpp"
