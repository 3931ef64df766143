#pragma once

#include "wkam/config.hpp"
#include "wkam/errors.hpp"
#include "wkam/hamiltonian.hpp"
#include "wkam/matrix_io.hpp"
#include "wkam/minplus.hpp"
#include "wkam/parallel.hpp"
#include "wkam/serialize.hpp"
#include "wkam/torus.hpp"
#include "wkam/verification.hpp"
#include "wkam/weak_kam.hpp"
