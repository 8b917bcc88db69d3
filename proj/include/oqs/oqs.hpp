#pragma once
// Umbrella header.
#include "oqs/qcore.hpp"
#include "oqs/ode.hpp"
#include "oqs/weakmeas.hpp"
#include "oqs/monotones.hpp"
#include "oqs/spinbath.hpp"
#include "oqs/cqec.hpp"
#include "oqs/subsys.hpp"
#include "oqs/holonomy.hpp"
