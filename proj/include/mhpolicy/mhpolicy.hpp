#pragma once

#include "mhpolicy/cartpole.hpp"
#include "mhpolicy/errors.hpp"
#include "mhpolicy/estimator.hpp"
#include "mhpolicy/harness.hpp"
#include "mhpolicy/lemma.hpp"
#include "mhpolicy/mdp.hpp"
#include "mhpolicy/mh_sampler.hpp"
#include "mhpolicy/param_vector.hpp"
#include "mhpolicy/policy.hpp"
#include "mhpolicy/random.hpp"
#include "mhpolicy/reinforce.hpp"
#include "mhpolicy/replay_buffer.hpp"
#include "mhpolicy/trace_csv.hpp"
#include "mhpolicy/transition.hpp"
