#pragma once

#include "scandyn/version.hpp"
#include "scandyn/se3.hpp"
#include "scandyn/scan.hpp"
#include "scandyn/robot_model.hpp"
#include "scandyn/inverse_dynamics.hpp"
#include "scandyn/forward_dynamics.hpp"
