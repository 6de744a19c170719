#pragma once

#include "phr/condensed_forms.hpp"
#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/generators.hpp"
#include "phr/io_json.hpp"
#include "phr/numeric.hpp"
#include "phr/pencil.hpp"
#include "phr/ph_form.hpp"
#include "phr/positive_real.hpp"
#include "phr/synthesis.hpp"
#include "phr/system.hpp"
