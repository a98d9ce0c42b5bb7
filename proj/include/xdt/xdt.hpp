#pragma once

#include "xdt/errors.hpp"
#include "xdt/format.hpp"
#include "xdt/gcd.hpp"
#include "xdt/minimize.hpp"
#include "xdt/term.hpp"
#include "xdt/transducer.hpp"
#include "xdt/unify.hpp"
#include "xdt/update.hpp"
