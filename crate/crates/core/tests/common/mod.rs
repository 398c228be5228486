#![allow(dead_code)]

pub const JAVA_FORMAT: &str = r#"public String format(LoggingEvent event) {
    // Reset working stringbuffer
    if(sbuf.capacity() > MAX_CAPACITY) {
      sbuf = new StringBuffer(BUF_SIZE);
    } else {
      sbuf.setLength(0);
    }

    PatternConverter c = head;

    while(c != null) {
      c.format(sbuf, event);
      c = c.next;
    }
    return sbuf.toString();
  }"#;

pub const PY_ERR_INDICES: &str = r#"def _get_err_indices(self, coord_name):
    err_indices = []
    dim = self.dim
    for ind, err in enumerate(self._parsed_error_names):
        if err[1] == coord_name:
            err_indices.append(ind + dim)
    return err_indices
"#;
