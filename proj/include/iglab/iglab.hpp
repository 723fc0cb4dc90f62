#ifndef IGLAB_IGLAB_HPP
#define IGLAB_IGLAB_HPP

#include "iglab/bayes.hpp"
#include "iglab/classify.hpp"
#include "iglab/cli.hpp"
#include "iglab/completeness.hpp"
#include "iglab/grid_function.hpp"
#include "iglab/json_io.hpp"
#include "iglab/likelihood.hpp"
#include "iglab/model.hpp"
#include "iglab/numeric.hpp"
#include "iglab/report.hpp"
#include "iglab/rng.hpp"
#include "iglab/sampling.hpp"
#include "iglab/search.hpp"
#include "iglab/simulate.hpp"
#include "iglab/space.hpp"

#endif  // IGLAB_IGLAB_HPP
