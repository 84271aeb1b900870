#pragma once

#include "descent/compositions.hpp"
#include "descent/diagnostics.hpp"
#include "descent/exact_core.hpp"
#include "descent/moments.hpp"
#include "descent/processes.hpp"
#include "descent/random.hpp"
#include "descent/types.hpp"
