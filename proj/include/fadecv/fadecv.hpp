#pragma once

#include "fadecv/beam_wandering.hpp"
#include "fadecv/channel.hpp"
#include "fadecv/common.hpp"
#include "fadecv/gaussian.hpp"
#include "fadecv/io.hpp"
#include "fadecv/montecarlo.hpp"
#include "fadecv/postselect.hpp"
#include "fadecv/security.hpp"
