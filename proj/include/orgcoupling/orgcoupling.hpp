#pragma once

#include "coupling.hpp"
#include "csv.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "ingest.hpp"
#include "longitudinal.hpp"
#include "oracle.hpp"
#include "pipeline.hpp"
#include "roles.hpp"
#include "synth.hpp"
#include "timeutil.hpp"
#include "tracegraph.hpp"
#include "window.hpp"
