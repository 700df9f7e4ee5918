#pragma once

#include "mmalert/clutter.hpp"
#include "mmalert/common.hpp"
#include "mmalert/config.hpp"
#include "mmalert/detector.hpp"
#include "mmalert/dsp.hpp"
#include "mmalert/estimator.hpp"
#include "mmalert/harness.hpp"
#include "mmalert/io.hpp"
#include "mmalert/motion_model.hpp"
#include "mmalert/scenario.hpp"
#include "mmalert/waveform.hpp"
