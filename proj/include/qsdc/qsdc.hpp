#pragma once

#include "qsdc/attack.hpp"
#include "qsdc/bitstring.hpp"
#include "qsdc/combinatorics.hpp"
#include "qsdc/disclosure.hpp"
#include "qsdc/entropy.hpp"
#include "qsdc/operators.hpp"
#include "qsdc/optimize.hpp"
#include "qsdc/parallel.hpp"
#include "qsdc/probe_states.hpp"
#include "qsdc/protocol_sim.hpp"
#include "qsdc/rate_engine.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/symmetry.hpp"
