#pragma once

#include "zidrm/asymptotics.hpp"
#include "zidrm/basis.hpp"
#include "zidrm/data.hpp"
#include "zidrm/errors.hpp"
#include "zidrm/functionals.hpp"
#include "zidrm/inference.hpp"
#include "zidrm/likelihood.hpp"
#include "zidrm/math.hpp"
#include "zidrm/params.hpp"
#include "zidrm/rng.hpp"
#include "zidrm/simulation.hpp"
#include "zidrm/solver.hpp"
