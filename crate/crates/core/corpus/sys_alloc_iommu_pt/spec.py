# sys_alloc_iommu_pt -- IOMMU page tables
def sys_alloc_iommu_pt(old, frm, index, to, perm):
    cond = z3.And(
        z3.ULT(frm, dt.NPAGE),
        z3.ULT(to, dt.NPAGE),
        z3.ULT(index, dt.PAGE_WORDS),
        old.pages[frm].type == dt.page_type.PAGE_TYPE_IOMMU_PT,
        old.pages[frm].owner == old.current,
        old.pages[frm].data(index) == 0,
        old.pages[to].type == dt.page_type.PAGE_TYPE_FREE,
    )
    new = old.copy()
    new.pages[to].type = dt.page_type.PAGE_TYPE_IOMMU_PT
    new.pages[to].owner = old.current
    new.pages[to].refcnt = 1
    new.pages[frm].data[index] = (new.pages_ptr_to_int + to * dt.PAGE_SIZE) | perm
    new.procs[old.current].nr_pages += 1
    return cond, util.If(cond, new, old)
