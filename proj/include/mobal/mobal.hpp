#pragma once

#include "mobal/bounds.hpp"
#include "mobal/conjecture.hpp"
#include "mobal/csv.hpp"
#include "mobal/experiments.hpp"
#include "mobal/loop.hpp"
#include "mobal/netsys.hpp"
#include "mobal/particle_filter.hpp"
#include "mobal/pomdp.hpp"
#include "mobal/quantizer.hpp"
#include "mobal/rng.hpp"
