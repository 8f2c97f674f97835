from mpmath import mp


def format_real(value, digits=30):
    value = mp.mpf(value)
    if value == 0:
        return '0'
    return mp.nstr(value, digits, strip_zeros=False, min_fixed=-8, max_fixed=12)


def format_complex(value, digits=30):
    value = mp.mpc(value)
    return [format_real(value.real, digits), format_real(value.imag, digits)]


def format_vector(values, digits=30):
    return [format_complex(v, digits) for v in values]


def format_matrix(rows, digits=30):
    return [format_vector(row, digits) for row in rows]
