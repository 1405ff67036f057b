#pragma once

#include "attoscat/config.hpp"
#include "attoscat/lindblad.hpp"
#include "attoscat/matrix.hpp"
#include "attoscat/model.hpp"
#include "attoscat/scattering.hpp"
#include "attoscat/sweep.hpp"
#include "attoscat/timescales.hpp"
#include "attoscat/units.hpp"
#include "attoscat/version.hpp"
