#pragma once

#include "berwald/base_metric.hpp"
#include "berwald/charts.hpp"
#include "berwald/connection.hpp"
#include "berwald/curvature.hpp"
#include "berwald/differentiation.hpp"
#include "berwald/dual.hpp"
#include "berwald/errors.hpp"
#include "berwald/expression.hpp"
#include "berwald/fundamental_tensor.hpp"
#include "berwald/geodesic.hpp"
#include "berwald/lambda_series.hpp"
#include "berwald/normal_chart.hpp"
#include "berwald/sampling.hpp"
#include "berwald/scalar_factor.hpp"
#include "berwald/tensor.hpp"
#include "berwald/validation.hpp"
#include "berwald/vector_field.hpp"
