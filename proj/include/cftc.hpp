#pragma once

#include "cftc/cft.hpp"
#include "cftc/checker.hpp"
#include "cftc/component.hpp"
#include "cftc/environment.hpp"
#include "cftc/equivalence.hpp"
#include "cftc/error.hpp"
#include "cftc/formula.hpp"
#include "cftc/harness.hpp"
#include "cftc/model.hpp"
#include "cftc/parallel.hpp"
