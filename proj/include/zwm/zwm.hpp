#pragma once

#include "zwm/errors.hpp"
#include "zwm/fock.hpp"
#include "zwm/dense.hpp"
#include "zwm/dynamics.hpp"
#include "zwm/fringe.hpp"
#include "zwm/interferometer.hpp"
#include "zwm/scenario.hpp"
