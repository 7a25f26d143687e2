#pragma once

#include "ppg/groups.hpp"
#include "ppg/json_io.hpp"
#include "ppg/magnus.hpp"
#include "ppg/massey.hpp"
#include "ppg/numtheory.hpp"
#include "ppg/poly.hpp"
#include "ppg/presentation.hpp"
#include "ppg/ring.hpp"
#include "ppg/unipotent.hpp"
#include "ppg/word.hpp"
