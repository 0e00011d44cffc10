#pragma once

#include <confine/errors.hpp>
#include <confine/numerics.hpp>
#include <confine/profiles.hpp>
#include <confine/geometry.hpp>
#include <confine/sigma.hpp>
#include <confine/sturm.hpp>
#include <confine/criteria.hpp>
#include <confine/quadform.hpp>
#include <confine/fpsim.hpp>
#include <confine/cli.hpp>
