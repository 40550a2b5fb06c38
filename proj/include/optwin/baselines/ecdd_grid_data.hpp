#pragma once

// Generated by `optwin calibrate-ecdd`; rows are {p_hat, lambda, arl0, L}.

namespace optwin::ecdd_data {

inline constexpr double kGrid[][4] = {
    {0.05, 0.20, 100, 2.375000},
    {0.10, 0.20, 100, 2.187500},
    {0.15, 0.20, 100, 2.125000},
    {0.20, 0.20, 100, 2.000000},
    {0.25, 0.20, 100, 1.937500},
    {0.30, 0.20, 100, 1.875000},
    {0.35, 0.20, 100, 1.812500},
    {0.40, 0.20, 100, 1.812500},
    {0.45, 0.20, 100, 1.750000},
    {0.50, 0.20, 100, 1.687500},
    {0.05, 0.20, 400, 3.875000},
    {0.10, 0.20, 400, 3.375000},
    {0.15, 0.20, 400, 3.125000},
    {0.20, 0.20, 400, 2.937500},
    {0.25, 0.20, 400, 2.812500},
    {0.30, 0.20, 400, 2.687500},
    {0.35, 0.20, 400, 2.562500},
    {0.40, 0.20, 400, 2.468750},
    {0.45, 0.20, 400, 2.375000},
    {0.50, 0.20, 400, 2.250000},
    {0.05, 0.20, 1000, 4.625000},
    {0.10, 0.20, 1000, 4.000000},
    {0.15, 0.20, 1000, 3.656250},
    {0.20, 0.20, 1000, 3.406250},
    {0.25, 0.20, 1000, 3.218750},
    {0.30, 0.20, 1000, 3.031250},
    {0.35, 0.20, 1000, 2.906250},
    {0.40, 0.20, 1000, 2.750000},
    {0.45, 0.20, 1000, 2.625000},
    {0.50, 0.20, 1000, 2.468750},
};

}  // namespace optwin::ecdd_data
