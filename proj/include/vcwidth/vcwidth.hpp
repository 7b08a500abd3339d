#pragma once

#include "box_analysis.hpp"
#include "commands.hpp"
#include "convex_geometry.hpp"
#include "crush.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "random_families.hpp"
#include "serialization.hpp"
#include "standard_families.hpp"
#include "vc_combinatorics.hpp"
#include "version.hpp"
