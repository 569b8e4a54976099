#ifndef TRUNCEM_TRUNCEM_HPP
#define TRUNCEM_TRUNCEM_HPP

#include "truncem/analysis.hpp"
#include "truncem/config.hpp"
#include "truncem/em_core.hpp"
#include "truncem/errors.hpp"
#include "truncem/io.hpp"
#include "truncem/landscape.hpp"
#include "truncem/linalg.hpp"
#include "truncem/model.hpp"
#include "truncem/quad.hpp"
#include "truncem/rates.hpp"
#include "truncem/verify.hpp"

#endif  // TRUNCEM_TRUNCEM_HPP
