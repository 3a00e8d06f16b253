#pragma once

#include "hazefuse/airlight.hpp"
#include "hazefuse/coarse_transmission.hpp"
#include "hazefuse/config.hpp"
#include "hazefuse/fft.hpp"
#include "hazefuse/gradient.hpp"
#include "hazefuse/image.hpp"
#include "hazefuse/io.hpp"
#include "hazefuse/metrics.hpp"
#include "hazefuse/pipeline.hpp"
#include "hazefuse/recovery.hpp"
#include "hazefuse/refinement.hpp"
#include "hazefuse/synthesis.hpp"
#include "hazefuse/window_min.hpp"
