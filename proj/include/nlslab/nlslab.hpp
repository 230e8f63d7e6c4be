#pragma once
// nlslab.hpp — umbrella header.

#include "nlslab/model.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/tridiag.hpp"
#include "nlslab/soliton.hpp"
#include "nlslab/spectral.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/dichotomy.hpp"
#include "nlslab/io.hpp"
#include "nlslab/cli.hpp"
