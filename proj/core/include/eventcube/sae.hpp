#pragma once

#include "eventcube/sae/arch.hpp"
#include "eventcube/sae/checkpoint.hpp"
#include "eventcube/sae/features.hpp"
#include "eventcube/sae/model.hpp"
#include "eventcube/sae/train.hpp"
