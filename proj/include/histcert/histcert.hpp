#pragma once

// Umbrella header for the analysis library. io and commands pull in the
// JSON dependency and are included separately.

#include "histcert/certify.hpp"
#include "histcert/dynamics.hpp"
#include "histcert/error.hpp"
#include "histcert/gain.hpp"
#include "histcert/games.hpp"
#include "histcert/linalg.hpp"
#include "histcert/method.hpp"
#include "histcert/operators.hpp"
#include "histcert/polynomial.hpp"
#include "histcert/stability.hpp"
#include "histcert/transfer.hpp"
