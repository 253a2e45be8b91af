//! Companion gnuplot scripts for the CSV outputs.

/// One line per node and dimension from the long-format `trajectory.csv`.
pub fn trajectory_script(n: usize, m: usize) -> String {
    let mut s = String::from("set datafile separator ','\nset key off\nset xlabel 'k'\n");
    if m > 1 {
        s.push_str(&format!("set multiplot layout {m},1\n"));
    }
    for h in 0..m {
        s.push_str(&format!(
            "set ylabel 'x_{}'\nplot for [i=0:{}] 'trajectory.csv' skip 1 using \
             (($2 == i && $3 == {h}) ? $1 : 1/0):4 with lines\n",
            h + 1,
            n.saturating_sub(1)
        ));
    }
    if m > 1 {
        s.push_str("unset multiplot\n");
    }
    s
}

/// Initial and final histograms from `histogram_initial.csv` and
/// `histogram_final.csv` (columns lo, hi, count).
pub fn histogram_script() -> String {
    "set datafile separator ','\n\
     set style fill solid 0.5\n\
     set multiplot layout 2,1\n\
     set title 'X(0)'\n\
     plot 'histogram_initial.csv' skip 1 using (($1+$2)/2):3:($2-$1) with boxes notitle\n\
     set title 'X(final)'\n\
     plot 'histogram_final.csv' skip 1 using (($1+$2)/2):3:($2-$1) with boxes notitle\n\
     unset multiplot\n"
        .to_string()
}
