#ifndef TIMESTITCH_TIMESTITCH_HPP
#define TIMESTITCH_TIMESTITCH_HPP

#include "timestitch/ir.hpp"
#include "timestitch/device.hpp"
#include "timestitch/qasm.hpp"
#include "timestitch/sched.hpp"
#include "timestitch/sim.hpp"
#include "timestitch/slice.hpp"
#include "timestitch/tuner.hpp"
#include "timestitch/dd.hpp"
#include "timestitch/bench.hpp"

#endif  // TIMESTITCH_TIMESTITCH_HPP
