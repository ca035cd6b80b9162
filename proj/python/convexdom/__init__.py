from _convexdom import (  # noqa: F401
    DyadicCube,
    Family,
    GridFunction,
    GridSpec,
    MatrixWeight,
    NormTag,
    a_r_constant,
    body_dot,
    c_qr,
    certify,
    com_numbers_min,
    decompose_multiplier,
    duality_ratio,
    family_apply,
    lp_norm,
    make_family,
    maximal_function,
    multiscale_dominate,
    pairing,
    reducing_transform,
    rh_ts_constant,
    weight_generator,
)
