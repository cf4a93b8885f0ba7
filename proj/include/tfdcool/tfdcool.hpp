#pragma once

#include "tfdcool/channel.hpp"
#include "tfdcool/errors.hpp"
#include "tfdcool/fock.hpp"
#include "tfdcool/states.hpp"
#include "tfdcool/temperature.hpp"
#include "tfdcool/thermo.hpp"
