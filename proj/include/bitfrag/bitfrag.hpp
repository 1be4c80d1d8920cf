// Umbrella header.
#pragma once

#include "bitfrag/cost.hpp"
#include "bitfrag/dfg.hpp"
#include "bitfrag/dsl.hpp"
#include "bitfrag/fragmenter.hpp"
#include "bitfrag/kernel.hpp"
#include "bitfrag/pipeline.hpp"
#include "bitfrag/report.hpp"
#include "bitfrag/scheduler.hpp"
#include "bitfrag/simulator.hpp"
#include "bitfrag/timing.hpp"
