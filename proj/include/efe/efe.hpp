#pragma once

#include "efe/acquisition.hpp"
#include "efe/belief.hpp"
#include "efe/diagnostics.hpp"
#include "efe/energy.hpp"
#include "efe/env/allocation.hpp"
#include "efe/env/bandit.hpp"
#include "efe/env/plume.hpp"
#include "efe/env/sandbox.hpp"
#include "efe/error.hpp"
#include "efe/preference.hpp"
#include "efe/rng.hpp"
#include "efe/stats.hpp"
#include "efe/surrogate.hpp"
