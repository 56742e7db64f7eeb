#pragma once

#include "hqcspa/attack.hpp"
#include "hqcspa/bench.hpp"
#include "hqcspa/evaluation.hpp"
#include "hqcspa/export.hpp"
#include "hqcspa/gf2x.hpp"
#include "hqcspa/hex.hpp"
#include "hqcspa/hqc.hpp"
#include "hqcspa/leakage.hpp"
#include "hqcspa/peaks.hpp"
#include "hqcspa/poly.hpp"
