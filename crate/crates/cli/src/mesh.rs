use std::io::{self, Write};

use encircle::model::MeshPoint;

pub const MESH_HEADER: &str = "delta,j,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus";

pub fn write_mesh_csv<W: Write>(mesh: &[MeshPoint], w: &mut W) -> io::Result<()> {
    writeln!(w, "{MESH_HEADER}")?;
    for p in mesh {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.delta, p.j, p.lambda_plus.re, p.lambda_plus.im, p.lambda_minus.re, p.lambda_minus.im
        )?;
    }
    Ok(())
}
