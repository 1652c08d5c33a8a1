#pragma once

#include "cmx/analysis.hpp"
#include "cmx/dataset.hpp"
#include "cmx/errors.hpp"
#include "cmx/geometry.hpp"
#include "cmx/io.hpp"
#include "cmx/report.hpp"
#include "cmx/scoring.hpp"
#include "cmx/synth.hpp"
