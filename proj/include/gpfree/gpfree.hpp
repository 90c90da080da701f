#pragma once

#include "gpfree/arith.hpp"
#include "gpfree/bitmap.hpp"
#include "gpfree/bounds.hpp"
#include "gpfree/divisor.hpp"
#include "gpfree/error.hpp"
#include "gpfree/gp_core.hpp"
#include "gpfree/io.hpp"
#include "gpfree/process.hpp"
#include "gpfree/syndetic.hpp"
