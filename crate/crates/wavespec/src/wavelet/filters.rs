//! Hard-coded Daubechies low-pass filter taps (extremal phase), orders 2..8,
//! normalized so the taps sum to sqrt(2). Values carry full f64 precision;
//! the family constructor re-checks the filter-bank identities on every
//! build, so a corrupted table cannot go unnoticed.

pub const DB2: [f64; 4] = [
    0.48296291314453414,
    0.83651630373780791,
    0.22414386804201338,
    -0.12940952255126038,
];

pub const DB3: [f64; 6] = [
    0.33267055295008262,
    0.80689150931109258,
    0.45987750211849157,
    -0.13501102001025459,
    -0.085441273882026662,
    0.035226291885709537,
];

pub const DB4: [f64; 8] = [
    0.2303778133088965,
    0.71484657055291565,
    0.63088076792985891,
    -0.027983769416859854,
    -0.18703481171909308,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

pub const DB5: [f64; 10] = [
    0.16010239797419291,
    0.60382926979718967,
    0.72430852843777293,
    0.13842814590132073,
    -0.24229488706638203,
    -0.032244869584638375,
    0.077571493840045714,
    -0.0062414902127982743,
    -0.012580751999081999,
    0.0033357252854737713,
];

pub const DB6: [f64; 12] = [
    0.11154074335010946,
    0.49462389039845309,
    0.75113390802109535,
    0.31525035170919763,
    -0.22626469396543982,
    -0.12976686756726194,
    0.097501605587323049,
    0.027522865530305729,
    -0.03158203931748603,
    0.00055384220116149614,
    0.0047772575109455106,
    -0.0010773010853084796,
];

pub const DB7: [f64; 14] = [
    0.077852054085009179,
    0.39653931948191731,
    0.72913209084623512,
    0.46978228740519312,
    -0.14390600392856498,
    -0.22403618499387498,
    0.071309219266830265,
    0.080612609151083072,
    -0.038029936935014414,
    -0.016574541630666881,
    0.012550998556099841,
    0.00042957797292136652,
    -0.0018016407040474909,
    0.00035371379997452025,
];

pub const DB8: [f64; 16] = [
    0.05441584224310401,
    0.31287159091429997,
    0.67563073629728981,
    0.58535468365420671,
    -0.015829105256349306,
    -0.28401554296154693,
    0.00047248457391328277,
    0.12874742662047846,
    -0.017369301001807546,
    -0.044088253930794752,
    0.013981027917398282,
    0.0087460940474057767,
    -0.0048703529934515743,
    -0.00039174037337694705,
    0.00067544940645056937,
    -0.00011747678412476953,
];

pub fn low_pass(vanishing_moments: usize) -> Option<&'static [f64]> {
    match vanishing_moments {
        2 => Some(&DB2),
        3 => Some(&DB3),
        4 => Some(&DB4),
        5 => Some(&DB5),
        6 => Some(&DB6),
        7 => Some(&DB7),
        8 => Some(&DB8),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db2_matches_closed_form() {
        // (1 +- sqrt 3)-family over 4 sqrt 2
        let s3 = 3.0_f64.sqrt();
        let d = 4.0 * 2.0_f64.sqrt();
        let want = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        // the closed form itself carries ~2 ulps of f64 rounding
        for (got, want) in DB2.iter().zip(want) {
            assert!((got - want).abs() < 5e-16, "{got} vs {want}");
        }
    }

    #[test]
    fn all_orders_present_and_sized() {
        for n in 2..=8 {
            let taps = low_pass(n).unwrap();
            assert_eq!(taps.len(), 2 * n);
        }
        assert!(low_pass(1).is_none());
        assert!(low_pass(9).is_none());
    }
}
