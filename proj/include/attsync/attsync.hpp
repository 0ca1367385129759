#pragma once

#include "attsync/sphere.hpp"
#include "attsync/kernels.hpp"
#include "attsync/graph.hpp"
#include "attsync/controller.hpp"
#include "attsync/simulator.hpp"
#include "attsync/scenario.hpp"
