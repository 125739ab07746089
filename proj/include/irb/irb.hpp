#pragma once

#include "irb/classicalization.hpp"
#include "irb/density.hpp"
#include "irb/diagnostics.hpp"
#include "irb/frame.hpp"
#include "irb/gksl.hpp"
#include "irb/types.hpp"
