#pragma once

#include "modalkit/dmd.hpp"
#include "modalkit/errors.hpp"
#include "modalkit/io.hpp"
#include "modalkit/itd.hpp"
#include "modalkit/lscf.hpp"
#include "modalkit/modal.hpp"
#include "modalkit/numkit.hpp"
#include "modalkit/snapshots.hpp"
#include "modalkit/stability.hpp"
#include "modalkit/synth.hpp"
