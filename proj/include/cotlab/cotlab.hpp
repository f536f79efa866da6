#pragma once

#include "cotlab/adaptation.hpp"
#include "cotlab/amplification.hpp"
#include "cotlab/arithmetic.hpp"
#include "cotlab/chain.hpp"
#include "cotlab/constructions.hpp"
#include "cotlab/error.hpp"
#include "cotlab/expr.hpp"
#include "cotlab/io.hpp"
#include "cotlab/point.hpp"
#include "cotlab/risk.hpp"
#include "cotlab/scenario.hpp"
#include "cotlab/spaces.hpp"
