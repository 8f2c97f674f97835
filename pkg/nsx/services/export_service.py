import json
import os
import shutil
import tempfile
from pathlib import Path

import pandas as pd
from mpmath import mp

from nsx.config import Config
from nsx.models.report import DEVIATION_COLUMNS
from nsx.utils.errors import ValidationError
from nsx.utils.logger import logger
from nsx.utils.numformat import format_complex, format_real

ARC_COLUMNS = ['arc_id', 's', 're', 'im']


def _default(value, digits=Config.OUTPUT_DIGITS):
    if isinstance(value, mp.mpf):
        return format_real(value, digits)
    if isinstance(value, mp.mpc):
        return format_complex(value, digits)
    if isinstance(value, complex):
        return [repr(value.real), repr(value.imag)]
    if hasattr(value, 'to_dict'):
        return value.to_dict(digits)
    if hasattr(value, 'tolist'):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f'cannot serialize {type(value).__name__}')


class OutputBundle:
    """Files of one command run, held in memory until the run has succeeded."""

    def __init__(self):
        self.files = {}

    def add_json(self, name, data):
        self.files[name] = ('json', data)

    def add_table(self, name, columns, rows):
        self.files[name] = ('csv', pd.DataFrame(rows, columns=columns))

    def get(self, name):
        return self.files[name][1]

    def __contains__(self, name):
        return name in self.files

    def __len__(self):
        return len(self.files)


class ExportService:
    def __init__(self, digits=None):
        self.digits = digits or Config.OUTPUT_DIGITS

    def dumps(self, data):
        return json.dumps(data, indent=2, ensure_ascii=False,
                          default=lambda value: _default(value, self.digits)) + '\n'

    def arc_rows(self, contour):
        rows = []
        for k, arc in enumerate(contour.cut_arcs):
            arc = arc.normalized()
            for s, t in zip(arc.parametrization, arc.points):
                rows.append([k, format_real(s, self.digits), format_real(t.real, self.digits),
                             format_real(t.imag, self.digits)])
        return rows

    def add_arcs(self, bundle, contour):
        bundle.add_table('arcs.csv', ARC_COLUMNS, self.arc_rows(contour))

    def add_deviations(self, bundle, report):
        bundle.add_table('deviations.csv', DEVIATION_COLUMNS, report.to_rows(self.digits))

    def render(self, bundle):
        rendered = {}
        for name, (kind, payload) in sorted(bundle.files.items()):
            if kind == 'json':
                rendered[name] = self.dumps(payload)
            else:
                rendered[name] = payload.to_csv(index=False, lineterminator='\n')
        return rendered

    def commit(self, bundle, out_dir):
        """Write every file of the bundle into out_dir, or nothing at all."""
        out_dir = Path(out_dir)
        rendered = self.render(bundle)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ValidationError('cannot create the output directory', path=str(out_dir), reason=str(e))
        staging = Path(tempfile.mkdtemp(prefix='.nsx-', dir=out_dir))
        try:
            for name, text in rendered.items():
                (staging / name).write_text(text, encoding='utf-8')
            for name in rendered:
                os.replace(staging / name, out_dir / name)
        finally:
            shutil.rmtree(staging, ignore_errors=True)
        logger.info(f'Wrote {", ".join(sorted(rendered))} to {out_dir}')
        return [out_dir / name for name in sorted(rendered)]


export_service = ExportService()
